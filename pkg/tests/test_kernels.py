"""The weighted-softplus hot kernel: compiled and numpy paths must agree
to float rounding across the full argument range."""

import numpy as np
import pytest

from prodstat import kernels


def _reference(lc, w, q, lc1):
    t = q * (lc - lc1)
    return float(w @ (np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))))


def test_backend_reported():
    assert kernels.BACKEND in ("c-ext", "numpy")


def test_agreement_random():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 5000))
        lc = rng.normal(0.0, 4.0, n)
        w = rng.uniform(0.0, 100.0, n)
        q = 10.0 ** rng.uniform(-1, 1)
        lc1 = rng.normal(0.0, 2.0)
        got = kernels.softplus_wsum(lc, w, q, lc1)
        ref = _reference(lc, w, q, lc1)
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_extreme_arguments():
    # far tails: softplus(t) -> t for large t, -> exp(t) for very negative t
    lc = np.array([-800.0, -50.0, -1.0, 0.0, 1.0, 50.0, 800.0])
    w = np.ones_like(lc)
    got = kernels.softplus_wsum(lc, w, 1.0, 0.0)
    ref = _reference(lc, w, 1.0, 0.0)
    assert got == pytest.approx(ref, rel=1e-12)


def test_empty_and_zero_weights():
    assert kernels.softplus_wsum(np.array([]), np.array([]), 1.0, 0.0) == 0.0
    lc = np.array([1.0, 2.0])
    assert kernels.softplus_wsum(lc, np.zeros(2), 1.0, 0.0) == 0.0


def test_length_mismatch():
    with pytest.raises(ValueError):
        kernels.softplus_wsum(np.zeros(3), np.zeros(2), 1.0, 0.0)


def test_softplus_scalar_properties():
    t = np.linspace(-40, 40, 401)
    s = kernels.softplus(t)
    assert np.all(s >= 0.0)
    assert np.all(s >= t)                       # softplus(t) > t
    assert np.all(np.diff(s) > 0.0)             # strictly increasing
    # symmetry softplus(t) - softplus(-t) = t
    assert np.allclose(s - kernels.softplus(-t), t, atol=1e-12)
