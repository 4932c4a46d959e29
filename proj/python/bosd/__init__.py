"""Bayesian online segment detection.

Exact online filtering of the joint posterior over run length, segment
duration and hidden state, with residual-time prediction and supervised
maximum-likelihood learning. The heavy lifting lives in the compiled
extension; this package re-exports its surface.
"""

from bosd._core import (
    BocpdFilter,
    BosdFilter,
    Model,
    NumericalError,
    StepMarginals,
    band_features,
    complete_data_loglik,
    duration_from_hazard,
    enumerate_posterior,
    eval_metrics,
    fit_supervised,
    hazard_from_duration,
    residual_kernel,
    residual_posterior,
    sample,
)

__all__ = [
    "BocpdFilter",
    "BosdFilter",
    "Model",
    "NumericalError",
    "StepMarginals",
    "band_features",
    "complete_data_loglik",
    "duration_from_hazard",
    "enumerate_posterior",
    "eval_metrics",
    "fit_supervised",
    "hazard_from_duration",
    "residual_kernel",
    "residual_posterior",
    "sample",
]
