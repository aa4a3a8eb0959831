"""Finite-sample Chernoff and Hoeffding tail bounds for additive
functionals of finite-state Markov chains.

The pipeline: load a model (P, f, q), check the positivity-pattern
assumptions, build the exponential family of tilted chains and its large
deviations rate function, compute the prefactor constants, and evaluate
or simulate the resulting tail bounds.
"""

from .assumptions import AssumptionReport, Violation, validate
from .bounds import (BoundConstants, BoundReport, GridSummary, chernoff_bound,
                     constants, ergodic_gap, hoeffding_bound, two_sided_bound)
from .errors import (AssumptionError, ChainboundsError, ConvergenceError,
                     CrossCheckError, DomainError, ModelFormatError)
from .family import (MeanSet, RatePoint, SpectralCurve, TiltedFamily,
                     TiltedPoint, detect_degenerate, family_of, kl_rate,
                     kl_rate_direct, lambda_prime, lambda_second, mean_set,
                     rate_function, spectral_curve, theta_of_mean, tilt)
from .model import (LevelSets, MarkovModel, is_irreducible, level_sets,
                    load_model, parse_model)
from .perron import (BlockStructure, PerronTriple, limit_matrix, pf_extended,
                     pf_irreducible)
from .sim import (ErgodicCheck, TailEstimate, empirical_tail, ergodic_check,
                  lambda_n_exact, sample_trajectory)

__version__ = "0.1.0"

__all__ = [
    "MarkovModel", "LevelSets", "load_model", "parse_model",
    "is_irreducible", "level_sets",
    "PerronTriple", "BlockStructure", "pf_irreducible", "pf_extended",
    "limit_matrix",
    "AssumptionReport", "Violation", "validate",
    "TiltedPoint", "TiltedFamily", "SpectralCurve", "MeanSet", "RatePoint",
    "family_of", "tilt", "lambda_prime", "lambda_second", "theta_of_mean",
    "kl_rate", "kl_rate_direct", "rate_function", "detect_degenerate",
    "mean_set", "spectral_curve",
    "GridSummary", "BoundConstants", "BoundReport", "constants",
    "chernoff_bound", "hoeffding_bound", "two_sided_bound", "ergodic_gap",
    "TailEstimate", "ErgodicCheck", "sample_trajectory", "empirical_tail",
    "lambda_n_exact", "ergodic_check",
    "ChainboundsError", "ModelFormatError", "AssumptionError", "DomainError",
    "ConvergenceError", "CrossCheckError",
    "__version__",
]
