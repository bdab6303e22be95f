"""Sequential Monte Carlo filters for dynamic generalised linear models.

Models and runs are described by the same config text the ``dglm`` command
line tool reads; series are passed as parallel ``t`` and ``y`` lists with
``None`` marking a missing observation.
"""

from ._core import (
    ConfigError,
    IoError,
    NumericalError,
    __version__,
    ess,
    estimate_loglik,
    kalman_filter,
    normalize_log_weights,
    resample,
    run_filter,
    run_pmmh,
    simulate,
    weighted_quantile,
)

__all__ = [
    "ConfigError",
    "IoError",
    "NumericalError",
    "__version__",
    "ess",
    "estimate_loglik",
    "kalman_filter",
    "normalize_log_weights",
    "resample",
    "run_filter",
    "run_pmmh",
    "simulate",
    "weighted_quantile",
]
