"""Weighted moving-average small-deviation toolkit."""

from ._core import (
    Error,
    Spectrum,
    Weights,
    Window,
    autocovariance,
    constant_Bp,
    direct_sim,
    exact_small_case,
    predicted_eigenvalue,
    predicted_log_smalldev,
    saddlepoint,
    spectrum,
    theory_constants,
    tilted_mc,
    window_of,
    __version__,
)

__all__ = [
    "Error",
    "Spectrum",
    "Weights",
    "Window",
    "autocovariance",
    "constant_Bp",
    "direct_sim",
    "exact_small_case",
    "predicted_eigenvalue",
    "predicted_log_smalldev",
    "saddlepoint",
    "spectrum",
    "theory_constants",
    "tilted_mc",
    "window_of",
    "__version__",
]
