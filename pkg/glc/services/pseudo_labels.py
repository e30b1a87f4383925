"""One-vs-all global clustering pseudo labels with source-private suppression."""

from collections.abc import Collection
import logging

import numpy as np

from glc.core.errors import DataError
from glc.core.logger import event_message
from glc.core.numeric import (
    IndexArray,
    Matrix,
    RngState,
    Vector,
    cosine_similarity_matrix,
    ensure_finite,
    l2_normalize,
    round_half_up,
    spawn_streams,
    stable_top_k,
)
from glc.models.models import UNKNOWN, ClassPrototypes
from glc.observability.events import LogEvent
from glc.services.clustering import kmeans
from glc.services.types import PseudoLabelResult

logger = logging.getLogger(__name__)


def select_positives(probs: Matrix, class_index: int, k: int) -> IndexArray:
    """Top-k rows of column ``class_index``; ties favour the smaller row index."""
    probs = np.asarray(probs, dtype=np.float64)
    num_samples = probs.shape[0]
    if not 1 <= k <= num_samples:
        raise DataError(f"K must lie in [1, {num_samples}], got {k}.")
    if not 0 <= class_index < probs.shape[1]:
        raise DataError(f"Class {class_index} is outside [0, {probs.shape[1]}).")
    return stable_top_k(probs[:, class_index], k)


def suppression_weight(confidences: Vector, rho: float) -> float:
    """ε_c = ρ + (1 − ρ)·mean confidence of the positive group, kept in [ρ, 1]."""
    mean_confidence = float(np.mean(confidences))
    return float(np.clip(rho + (1.0 - rho) * mean_confidence, rho, 1.0))


def _build_from_unit(
    unit_features: Matrix,
    probs: Matrix,
    class_index: int,
    k: int,
    num_negatives: int,
    rho: float,
    rng: RngState,
) -> ClassPrototypes:
    positives = select_positives(probs, class_index, k)
    negative_mask = np.ones(unit_features.shape[0], dtype=bool)
    negative_mask[positives] = False
    if int(negative_mask.sum()) < num_negatives:
        raise DataError(
            f"Class {class_index}: {int(negative_mask.sum())} negatives cannot form "
            f"{num_negatives} prototypes."
        )
    negatives = kmeans(unit_features[negative_mask], num_negatives, rng).centroids
    return ClassPrototypes(
        class_index=class_index,
        positive=unit_features[positives].mean(axis=0),
        negatives=negatives,
        epsilon=suppression_weight(probs[positives, class_index], rho),
        positive_indices=positives,
    )


def build_prototypes(
    features: Matrix,
    probs: Matrix,
    class_index: int,
    k: int,
    num_negatives: int,
    rho: float,
    rng: RngState,
) -> ClassPrototypes:
    """Positive prototype, M negative k-means prototypes and ε_c for one class."""
    if not 0.0 < rho <= 1.0:
        raise DataError(f"rho must lie in (0, 1], got {rho}.")
    return _build_from_unit(
        l2_normalize(features),
        np.asarray(probs, dtype=np.float64),
        class_index,
        k,
        num_negatives,
        rho,
        rng,
    )


def _membership(unit_features: Matrix, protos: ClassPrototypes) -> tuple[Vector, Vector]:
    # Zero-norm prototypes score 0 against everything.
    positive_sim = cosine_similarity_matrix(unit_features, protos.positive[None, :])[:, 0]
    negative_sim = cosine_similarity_matrix(unit_features, protos.negatives).max(axis=1)
    return protos.epsilon * positive_sim, negative_sim


def decide_membership(feature: Vector, protos: ClassPrototypes) -> tuple[bool, float]:
    """Claim iff ε_c·cos(x, p_c) ≥ max_i cos(x, n_c^i)."""
    unit = l2_normalize(np.asarray(feature, dtype=np.float64)[None, :])
    score, negative = _membership(unit, protos)
    return bool(score[0] >= negative[0]), float(score[0])


def assign_pseudo_labels(
    features: Matrix,
    probs: Matrix,
    class_count: int,
    rho: float,
    rng: RngState,
) -> PseudoLabelResult:
    """Label every sample one-hot at its best claiming class, or uniform if unclaimed.

    K = round(N / C̃_t) positives and M = C̃_t negative prototypes per class.
    Each class clusters on its own child stream of ``rng``.
    """
    probs = np.asarray(probs, dtype=np.float64)
    ensure_finite(probs, "Probabilities")
    num_samples, num_classes = probs.shape
    if np.asarray(features).shape[0] != num_samples:
        raise DataError("Features and probabilities must have the same row count.")
    if class_count < 1:
        raise DataError(f"C̃_t must be positive, got {class_count}.")
    if not 0.0 < rho <= 1.0:
        raise DataError(f"rho must lie in (0, 1], got {rho}.")
    k = max(1, round_half_up(num_samples / class_count))
    unit = l2_normalize(features)

    scores = np.full((num_samples, num_classes), -np.inf)
    prototypes: list[ClassPrototypes] = []
    for class_index, stream in enumerate(spawn_streams(rng, num_classes)):
        protos = _build_from_unit(unit, probs, class_index, k, class_count, rho, stream)
        positive, negative = _membership(unit, protos)
        claimed = positive >= negative
        scores[claimed, class_index] = positive[claimed]
        prototypes.append(protos)

    any_claim = np.isfinite(scores).any(axis=1)
    winners = np.argmax(scores, axis=1)
    claimed_class = np.where(any_claim, winners, UNKNOWN).astype(np.int64)

    targets = np.full((num_samples, num_classes), 1.0 / num_classes)
    rows = np.flatnonzero(any_claim)
    targets[rows] = 0.0
    targets[rows, winners[rows]] = 1.0
    best_scores = np.where(any_claim, scores.max(axis=1), np.nan)

    result = PseudoLabelResult(
        targets=targets,
        claimed=claimed_class,
        scores=best_scores,
        prototypes=tuple(prototypes),
    )
    logger.debug(
        event_message(
            LogEvent.PSEUDO_LABELS_ASSIGNED,
            samples=num_samples,
            k=k,
            negatives=class_count,
            unknown_fraction=result.unknown_fraction,
        )
    )
    return result


def count_false_claims(result: PseudoLabelResult, classes: Collection[int]) -> int:
    """Samples whose pseudo label landed on one of ``classes``."""
    return int(np.isin(result.claimed, list(classes)).sum())
