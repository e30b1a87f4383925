"""Dense array helpers shared by every layer.

All arrays are float64. Random streams are ``numpy.random.Generator`` instances
over the counter-based Philox bit generator; see ``docs/determinism.md``.
"""

from collections.abc import Sequence
from enum import StrEnum
import math
from typing import TypeAlias

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import pdist, squareform
from scipy.special import softmax as _scipy_softmax

from glc.core.errors import NumericError

Matrix: TypeAlias = npt.NDArray[np.float64]
Vector: TypeAlias = npt.NDArray[np.float64]
IndexArray: TypeAlias = npt.NDArray[np.int64]
RngState: TypeAlias = np.random.Generator


class DistanceMetric(StrEnum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"


# Stable integer ids for named streams. Never derive these from hash().
STREAM_KEYS: dict[str, int] = {
    "init": 1,
    "source-shuffle": 2,
    "estimate": 3,
    "pseudo": 4,
    "adapt-shuffle": 5,
    "class-means": 6,
    "domain-shift": 7,
    "source-samples": 8,
    "target-samples": 9,
}


def make_rng(seed: int, *keys: int | str) -> RngState:
    """Build a Philox stream from a user seed plus optional stream keys."""
    if seed < 0 or seed >= 2**64:
        raise NumericError(f"Seed must be a 64-bit unsigned integer, got {seed}.")
    entropy = [int(seed)]
    for key in keys:
        if isinstance(key, str):
            if key not in STREAM_KEYS:
                raise NumericError(f"Unknown stream key {key!r}.")
            entropy.append(STREAM_KEYS[key])
        else:
            entropy.append(int(key))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def spawn_streams(rng: RngState, count: int) -> list[RngState]:
    """Independent child streams; identical for identical parent state."""
    return list(rng.spawn(count))


def seed_from(rng: RngState) -> int:
    """Draw a 31-bit integer seed for libraries that only accept ints."""
    return int(rng.integers(0, 2**31 - 1))


def ensure_finite(values: npt.ArrayLike, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericError(f"{what} contains non-finite values.")


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def softmax(logits: npt.ArrayLike) -> Matrix:
    """Row-wise softmax over the last axis, max-subtracted."""
    array = np.asarray(logits, dtype=np.float64)
    ensure_finite(array, "Logits")
    return _scipy_softmax(array, axis=-1)


def l2_normalize(values: npt.ArrayLike) -> Matrix:
    """Scale a vector, or each row of a matrix, to unit Euclidean norm."""
    array = np.asarray(values, dtype=np.float64)
    ensure_finite(array, "Input")
    norms = np.linalg.norm(array, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise NumericError("Cannot normalize a zero-norm vector.")
    return array / norms


def cosine_similarity(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    left = np.asarray(a, dtype=np.float64)
    right = np.asarray(b, dtype=np.float64)
    if left.shape != right.shape:
        raise NumericError(
            f"Vectors differ in shape: {left.shape} vs {right.shape}."
        )
    ensure_finite(left, "Vector")
    ensure_finite(right, "Vector")
    left_norm = float(np.linalg.norm(left))
    right_norm = float(np.linalg.norm(right))
    if left_norm == 0.0 or right_norm == 0.0:
        raise NumericError("Cosine similarity is undefined for a zero-norm vector.")
    value = float(np.dot(left, right)) / (left_norm * right_norm)
    return min(1.0, max(-1.0, value))


def cosine_similarity_matrix(left: Matrix, right: Matrix) -> Matrix:
    """Row-vs-row cosine similarities; zero-norm rows of ``right`` score 0."""
    left_unit = l2_normalize(left)
    right = np.asarray(right, dtype=np.float64)
    norms = np.linalg.norm(right, axis=1, keepdims=True)
    right_unit = np.divide(right, norms, out=np.zeros_like(right), where=norms > 0)
    return np.clip(left_unit @ right_unit.T, -1.0, 1.0)


def pairwise_distance(
    X: Matrix, metric: DistanceMetric | str = DistanceMetric.COSINE
) -> Matrix:
    """Symmetric N×N distance matrix with an exact zero diagonal.

    Cosine distance is ``1 - cosine_similarity`` and lies in [0, 2].
    """
    data = np.asarray(X, dtype=np.float64)
    if data.ndim != 2:
        raise NumericError(f"Expected a 2-D matrix, got shape {data.shape}.")
    ensure_finite(data, "Feature matrix")
    metric = DistanceMetric(metric)
    if data.shape[0] < 2:
        return np.zeros((data.shape[0], data.shape[0]), dtype=np.float64)
    if metric is DistanceMetric.COSINE:
        if np.any(np.linalg.norm(data, axis=1) == 0.0):
            raise NumericError("Cosine distance is undefined for zero-norm rows.")
        condensed = np.clip(pdist(data, metric="cosine"), 0.0, 2.0)
    else:
        condensed = pdist(data, metric="euclidean")
    return squareform(condensed, checks=False)


def stable_top_k(column: Sequence[float] | Vector, k: int) -> IndexArray:
    """Indices of the k largest entries; equal values keep ascending index order."""
    values = np.asarray(column, dtype=np.float64)
    order = np.argsort(-values, kind="stable")
    return order[:k].astype(np.int64)
