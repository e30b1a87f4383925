from dataclasses import dataclass, field

import numpy as np

from glc.core.numeric import IndexArray, Matrix, Vector
from glc.models.models import ClassCountEstimate, ClassPrototypes, ModelParams
from glc.models.schemas import EvalProtocol, Variant


@dataclass(frozen=True)
class ForwardPass:
    features: Matrix
    logits: Matrix
    probs: Matrix
    hidden_pre: Matrix


@dataclass(frozen=True)
class PseudoLabelResult:
    """Global-clustering pseudo labels for one labeling round.

    ``targets`` rows are one-hot at ``claimed[i]`` or uniform when
    ``claimed[i] == -1``.
    """

    targets: Matrix
    claimed: IndexArray
    scores: Vector
    prototypes: tuple[ClassPrototypes, ...]

    @property
    def unknown_fraction(self) -> float:
        if self.claimed.size == 0:
            return 0.0
        return float(np.mean(self.claimed == -1))

    @property
    def epsilons(self) -> tuple[float, ...]:
        return tuple(proto.epsilon for proto in self.prototypes)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss_glb: float
    loss_loc: float
    loss_tar: float
    c_t_hat: int
    h_score: float | None = None
    acc_known: float | None = None
    acc_unknown: float | None = None
    unknown_fraction: float | None = None


@dataclass(frozen=True)
class AdaptHistory:
    records: tuple[EpochRecord, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def appended(self, record: EpochRecord) -> "AdaptHistory":
        return AdaptHistory(records=(*self.records, record))


@dataclass(frozen=True)
class AdaptResult:
    params: ModelParams
    history: AdaptHistory
    estimate: ClassCountEstimate | None
    c_t_hat: int
    checksum_before: str
    checksum_after: str
    variant: Variant = Variant.FULL

    @property
    def classifier_unchanged(self) -> bool:
        return self.checksum_before == self.checksum_after


@dataclass(frozen=True)
class HScoreResult:
    h: float
    acc_known: float
    acc_unknown: float


@dataclass(frozen=True)
class EvaluationReport:
    protocol: EvalProtocol
    omega: float
    accuracy: float
    h_score: float | None = None
    acc_known: float | None = None
    acc_unknown: float | None = None
    unknown_fraction: float | None = None
    unknown_rate: float = 0.0

    @property
    def headline(self) -> float:
        """H-score for open protocols, overall accuracy otherwise."""
        if self.protocol is EvalProtocol.H_SCORE and self.h_score is not None:
            return self.h_score
        return self.accuracy


@dataclass(frozen=True)
class SweepCell:
    index: int
    seed: int
    variant: Variant
    eta: float
    rho: float


@dataclass(frozen=True)
class SweepCellResult:
    cell: SweepCell
    c_t_hat: int
    reports: tuple[EvaluationReport, ...] = field(default_factory=tuple)
