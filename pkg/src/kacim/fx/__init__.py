"""Dependence-driven feature extraction and its evaluation protocol."""
from kacim.fx.extraction import (
    FxConfig,
    ProjectionModel,
    dimension_grid,
    dimension_sweep,
    fx_objective,
    train_feature_extractor,
)
from kacim.fx.logistic import logistic_accuracy, logistic_fit
from kacim.fx.stats import ComparisonTable, ranking_score, wilcoxon_signed_rank

__all__ = [
    "ComparisonTable", "FxConfig", "ProjectionModel", "dimension_grid", "dimension_sweep",
    "fx_objective", "logistic_accuracy", "logistic_fit", "ranking_score",
    "train_feature_extractor", "wilcoxon_signed_rank",
]
