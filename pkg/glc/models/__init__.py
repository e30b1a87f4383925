from glc.models.models import (
    UNKNOWN,
    ClassCountEstimate,
    ClassPrototypes,
    ClassRole,
    KMeansResult,
    LabeledDataset,
    Layer,
    ModelParams,
    OptimizerState,
    PredictionOutcome,
)
from glc.models.schemas import (
    AdaptConfig,
    EvalConfig,
    EvalProtocol,
    Scenario,
    ScenarioSpec,
    SourceConfig,
    SweepConfig,
    Variant,
)

__all__ = [
    "UNKNOWN",
    "AdaptConfig",
    "ClassCountEstimate",
    "ClassPrototypes",
    "ClassRole",
    "EvalConfig",
    "EvalProtocol",
    "KMeansResult",
    "LabeledDataset",
    "Layer",
    "ModelParams",
    "OptimizerState",
    "PredictionOutcome",
    "Scenario",
    "ScenarioSpec",
    "SourceConfig",
    "SweepConfig",
    "Variant",
]
