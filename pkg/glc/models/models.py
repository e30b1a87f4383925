from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from glc.core.numeric import IndexArray, Matrix, Vector


class ClassRole(StrEnum):
    SHARED = "shared"
    SOURCE_PRIVATE = "source-private"
    TARGET_PRIVATE = "target-private"


@dataclass(frozen=True)
class LabeledDataset:
    """Samples in rows with labels in the global class indexing.

    Shared classes come first, then source-private, then target-private, so a
    label is known to a source model of width C_s iff it is below C_s.
    """

    X: Matrix
    y: IndexArray
    roles: Mapping[int, ClassRole] = field(default_factory=dict)

    @property
    def num_samples(self) -> int:
        return int(self.X.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.X.shape[1])

    def classes(self) -> tuple[int, ...]:
        return tuple(int(label) for label in np.unique(self.y))


LAYER_NAMES: tuple[str, ...] = ("hidden", "feature", "classifier")


@dataclass(frozen=True)
class Layer:
    weight: Matrix  # fan_in × fan_out
    bias: Vector


@dataclass(frozen=True)
class ModelParams:
    """Feature module g = (hidden, feature) and linear classifier h."""

    hidden: Layer
    feature: Layer
    classifier: Layer

    @property
    def input_dim(self) -> int:
        return int(self.hidden.weight.shape[0])

    @property
    def hidden_dim(self) -> int:
        return int(self.hidden.weight.shape[1])

    @property
    def feature_dim(self) -> int:
        return int(self.feature.weight.shape[1])

    @property
    def num_classes(self) -> int:
        return int(self.classifier.weight.shape[1])

    def layer(self, name: str) -> Layer:
        return getattr(self, name)

    def layers(self) -> Iterator[tuple[str, Layer]]:
        for name in LAYER_NAMES:
            yield name, self.layer(name)

    def tensors(self) -> Iterator[tuple[str, np.ndarray]]:
        for name, layer in self.layers():
            yield f"{name}.weight", layer.weight
            yield f"{name}.bias", layer.bias


@dataclass(frozen=True)
class OptimizerState:
    velocity: ModelParams
    lr: float
    momentum: float = 0.9


@dataclass(frozen=True)
class KMeansResult:
    centroids: Matrix
    assignments: IndexArray
    inertia: float
    inertia_history: tuple[float, ...] = ()
    iterations: int = 0


@dataclass(frozen=True)
class ClassCountEstimate:
    chosen: int
    candidate_scores: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class ClassPrototypes:
    class_index: int
    positive: Vector
    negatives: Matrix
    epsilon: float
    positive_indices: IndexArray

    @property
    def num_negatives(self) -> int:
        return int(self.negatives.shape[0])


UNKNOWN: int = -1


@dataclass(frozen=True)
class PredictionOutcome:
    """Predicted class per sample, or ``UNKNOWN``, plus normalized entropy."""

    predictions: IndexArray
    entropy: Vector
    omega: float

    @property
    def num_samples(self) -> int:
        return int(self.predictions.shape[0])
