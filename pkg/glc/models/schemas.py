from __future__ import annotations

from enum import StrEnum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from glc.core.numeric import DistanceMetric


class Scenario(StrEnum):
    CLDA = "clda"
    PDA = "pda"
    OSDA = "osda"
    OPDA = "opda"


class Variant(StrEnum):
    FULL = "full"
    NO_GLOBAL = "no_global"
    NO_LOCAL = "no_local"


class EvalProtocol(StrEnum):
    H_SCORE = "h-score"
    ACCURACY = "accuracy"


# (shared, source-private, target-private), shaped after the Office-31 splits.
SCENARIO_SPLITS: dict[Scenario, tuple[int, int, int]] = {
    Scenario.OPDA: (10, 10, 11),
    Scenario.OSDA: (10, 0, 11),
    Scenario.PDA: (10, 21, 0),
    Scenario.CLDA: (31, 0, 0),
}

SCENARIO_PROTOCOLS: dict[Scenario, EvalProtocol] = {
    Scenario.OPDA: EvalProtocol.H_SCORE,
    Scenario.OSDA: EvalProtocol.H_SCORE,
    Scenario.PDA: EvalProtocol.ACCURACY,
    Scenario.CLDA: EvalProtocol.ACCURACY,
}


class ScenarioSpec(BaseModel):
    """Class split plus domain-shift geometry of a synthetic scenario.

    Split sizes left unset take the scenario's default split.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    scenario: Scenario = Scenario.OPDA
    shared: int = Field(default=10, ge=1)
    source_private: int = Field(default=10, ge=0)
    target_private: int = Field(default=11, ge=0)
    input_dim: int = Field(default=10, ge=2)
    source_per_class: int = Field(default=60, ge=1)
    target_per_class: int = Field(default=60, ge=1)
    rotation_deg: float = Field(default=25.0, ge=0.0, le=180.0)
    translation_scale: float = Field(default=0.5, ge=0.0)
    noise_std: float = Field(default=1.0, gt=0.0)
    target_noise_scale: float = Field(default=1.0, gt=0.0)
    separation: float = Field(default=8.0, gt=0.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _fill_scenario_splits(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        scenario = Scenario(data.get("scenario", Scenario.OPDA))
        shared, source_private, target_private = SCENARIO_SPLITS[scenario]
        filled = dict(data)
        filled.setdefault("shared", shared)
        filled.setdefault("source_private", source_private)
        filled.setdefault("target_private", target_private)
        return filled

    @model_validator(mode="after")
    def _check_category_shift(self) -> ScenarioSpec:
        has_source_private = self.source_private > 0
        has_target_private = self.target_private > 0
        expected = {
            Scenario.CLDA: (False, False),
            Scenario.PDA: (True, False),
            Scenario.OSDA: (False, True),
            Scenario.OPDA: (True, True),
        }[self.scenario]
        if (has_source_private, has_target_private) != expected:
            raise ValueError(
                f"{self.scenario.value} requires source_private "
                f"{'> 0' if expected[0] else '= 0'} and target_private "
                f"{'> 0' if expected[1] else '= 0'}; got "
                f"{self.source_private}/{self.target_private}"
            )
        return self

    @property
    def num_source_classes(self) -> int:
        return self.shared + self.source_private

    @property
    def num_target_classes(self) -> int:
        return self.shared + self.target_private

    @property
    def total_classes(self) -> int:
        return self.shared + self.source_private + self.target_private

    @property
    def protocol(self) -> EvalProtocol:
        return SCENARIO_PROTOCOLS[self.scenario]


class SourceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    hidden_dim: int = Field(default=64, ge=1)
    feature_dim: int = Field(default=32, ge=1)
    epochs: int = Field(default=30, ge=0)
    batch_size: int = Field(default=64, ge=1)
    lr: float = Field(default=1e-2, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    alpha: float = Field(default=0.1, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)


class AdaptConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    eta: float = Field(default=0.3, gt=0.0)
    rho: float = Field(default=0.75, gt=0.0, le=1.0)
    knn_k: int = Field(default=4, ge=1)
    epochs: int = Field(default=5, ge=0)
    batch_size: int = Field(default=64, ge=1)
    lr: float = Field(default=5e-3, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)
    pseudo_refresh: int = Field(default=1, ge=1)
    omega: float = Field(default=0.55, gt=0.0, lt=1.0)
    variant: Variant = Variant.FULL
    use_global: bool = True
    use_local: bool = True
    class_count: int | None = Field(default=None, ge=2)
    silhouette_metric: DistanceMetric = DistanceMetric.COSINE
    normalize_for_clustering: bool = True
    kmeans_restarts: int = Field(default=1, ge=1)
    kmeans_max_iters: int = Field(default=100, ge=1)
    kmeans_tol: float = Field(default=1e-6, ge=0.0)
    pseudo_dump_dir: Path | None = None

    @property
    def global_weight(self) -> float:
        return self.eta if self.use_global else 0.0


class EvalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    omega: float = Field(default=0.55, gt=0.0, lt=1.0)
    class_averaged: bool = False
    protocol: EvalProtocol | None = None


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    etas: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    rhos: tuple[float, ...] = (0.5, 2 / 3, 0.75, 0.8, 1.0)
    omegas: tuple[float, ...] = (0.35, 0.45, 0.55, 0.65, 0.75)
    seeds: tuple[int, ...] = (0,)
    variants: tuple[Variant, ...] = (Variant.FULL,)
    workers: int = Field(default=1, ge=1, le=64)

    @field_validator("etas", "rhos", "omegas", "seeds", "variants", mode="before")
    @classmethod
    def _parse_lists(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("etas", "rhos", "omegas", "seeds", "variants")
    @classmethod
    def _non_empty(cls, value: tuple[Any, ...]) -> tuple[Any, ...]:
        if not value:
            raise ValueError("must list at least one value")
        return value
