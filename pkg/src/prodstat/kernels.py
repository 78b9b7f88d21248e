"""Likelihood inner-loop reductions with two interchangeable backends.

The compiled extension (prodstat._fastkern) is used when available;
otherwise a numpy fallback.  Both compute the same reduction, and the
backend is fixed once at import time.  BACKEND reports which one is
active; benchmarks/bench_kernels.py compares them.
"""

from __future__ import annotations

import numpy as np

try:
    from . import _fastkern as _impl

    BACKEND = "c-ext"
except ImportError:  # pragma: no cover - depends on the build environment
    _impl = None
    BACKEND = "numpy"


def softplus(t: np.ndarray) -> np.ndarray:
    """Elementwise log(1 + e^t), overflow-safe. Numpy reference form."""
    t = np.asarray(t, dtype=np.float64)
    out = np.maximum(t, 0.0)
    out += np.log1p(np.exp(-np.abs(t)))
    return out


def softplus_wsum(lc: np.ndarray, w: np.ndarray, q: float, lc1: float) -> float:
    """sum(w[i] * softplus(q * (lc[i] - lc1))).

    lc and w must be contiguous float64 arrays of equal length; this is
    the hot reduction of the weighted GB2 log-likelihood, called once per
    objective evaluation with lc fixed and (q, lc1) varying.
    """
    if _impl is not None:
        return _impl.softplus_wsum(lc, w, q, lc1)
    return float(w @ softplus(q * (lc - lc1)))
