from .lasso import lambda_max, lasso_fit, soft_threshold
from .poly import poly_expand, term_columns
from .sparse import (FitReport, NormalizationParams, NoUsableFeatures, SparseModel,
                     mean_relative_error, normalize_and_prune, predict, prediction_error,
                     select_and_fit)

__all__ = [
    "lambda_max", "lasso_fit", "soft_threshold", "poly_expand", "term_columns",
    "FitReport", "NormalizationParams", "NoUsableFeatures", "SparseModel",
    "mean_relative_error", "normalize_and_prune", "predict", "prediction_error",
    "select_and_fit",
]
