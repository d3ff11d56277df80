"""Synthetic tabular augmentation with statistical filtering."""

from ._augmentor import (
    GeneratorError,
    SelectionFailed,
    __version__,
    bound_check,
    decode,
    encode,
    filter_candidates,
    fit_cv,
    fit_lasso,
    fit_ols,
    generate_surrogate,
    mmd,
    run_pipeline,
    simulate_linear,
    simulate_logistic,
    sliced_w1,
    strength_grid,
    tv_hist,
    w1_1d,
)

__all__ = [
    "GeneratorError",
    "SelectionFailed",
    "__version__",
    "bound_check",
    "decode",
    "encode",
    "filter_candidates",
    "fit_cv",
    "fit_lasso",
    "fit_ols",
    "generate_surrogate",
    "mmd",
    "run_pipeline",
    "simulate_linear",
    "simulate_logistic",
    "sliced_w1",
    "strength_grid",
    "tv_hist",
    "w1_1d",
]
