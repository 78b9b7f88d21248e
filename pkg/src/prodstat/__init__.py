"""Heavy-tail labour productivity toolkit.

Fits GB2 distributions to firm and worker productivity samples, maps
the fitted Pareto indices to demand indices, checks partition-function
thermodynamics against small-beta expansions, and validates the tail
relation mu_w = mu_f - gamma + 1 by Monte Carlo allocation.
"""

__version__ = "0.1.0"

from .errors import (DivergentMoment, EmptyYear, InsufficientData,
                     NonConvergence, OutOfRegime, ProdstatError, RegimeError,
                     SchemaError, TooManyBadRows, WindowError)
from .gb2 import FitResult, Gb2Params, fit_mle
from .ingest import FilterConfig, build_samples, load_csv, ranksize, sector_aggregate
from .simulate import SimConfig, SimOutput, run_sim, verify_tail_relation
from .superstat import (BetaWeight, DemandIndexPoint, ParetoIndices, Regime,
                        SectorClass, b_factor, delta_from_gamma,
                        gamma_from_mus, kappa_from_mus, mu_w_predicted)
from .thermo import (ThermoModel, check_monotonicity, demand,
                     demand_expansion, moment, partition, partition_expansion)

__all__ = [
    "__version__",
    "ProdstatError", "InsufficientData", "NonConvergence", "RegimeError",
    "DivergentMoment", "OutOfRegime", "WindowError", "SchemaError",
    "TooManyBadRows", "EmptyYear",
    "Gb2Params", "FitResult", "fit_mle",
    "ParetoIndices", "DemandIndexPoint", "BetaWeight", "Regime",
    "SectorClass", "gamma_from_mus", "delta_from_gamma", "kappa_from_mus",
    "mu_w_predicted", "b_factor",
    "ThermoModel", "partition", "demand", "moment",
    "partition_expansion", "demand_expansion", "check_monotonicity",
    "SimConfig", "SimOutput", "run_sim", "verify_tail_relation",
    "FilterConfig", "load_csv", "build_samples", "sector_aggregate",
    "ranksize",
]
