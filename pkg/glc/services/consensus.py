"""Memory bank and local k-NN consensus targets."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from glc.core.errors import DataError
from glc.core.numeric import IndexArray, Matrix, ensure_finite, l2_normalize
from glc.services.network import soft_ce_loss

# Cosine similarities are rounded before ranking so that rows equal up to
# positive scaling tie exactly.
SIMILARITY_DECIMALS = 12


@dataclass(frozen=True)
class MemoryBank:
    """Latest (feature, prob) per target sample; ``unit_features`` drive the k-NN."""

    features: Matrix
    unit_features: Matrix
    probs: Matrix
    initialized: npt.NDArray[np.bool_]

    @property
    def num_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def ready(self) -> bool:
        return bool(self.initialized.all())


def _check_rows(features: Matrix, probs: Matrix) -> tuple[Matrix, Matrix]:
    features = np.array(features, dtype=np.float64)
    probs = np.array(probs, dtype=np.float64)
    if features.ndim != 2 or probs.ndim != 2 or features.shape[0] != probs.shape[0]:
        raise DataError(
            f"Bank rows disagree: features {features.shape}, probs {probs.shape}."
        )
    ensure_finite(features, "Bank features")
    ensure_finite(probs, "Bank probabilities")
    return features, probs


def bank_init(features: Matrix, probs: Matrix) -> MemoryBank:
    features, probs = _check_rows(features, probs)
    return MemoryBank(
        features=features,
        unit_features=l2_normalize(features),
        probs=probs,
        initialized=np.ones(features.shape[0], dtype=bool),
    )


def bank_update(
    bank: MemoryBank, indices: npt.ArrayLike, features: Matrix, probs: Matrix
) -> MemoryBank:
    """Replace the listed rows; every other row is left untouched."""
    rows = np.asarray(indices, dtype=np.int64).reshape(-1)
    if rows.size == 0:
        return bank
    if rows.min() < 0 or rows.max() >= bank.num_samples:
        raise DataError(f"Bank index out of range [0, {bank.num_samples}).")
    if np.unique(rows).size != rows.size:
        raise DataError("Bank update indices must be unique.")
    features, probs = _check_rows(features, probs)
    if features.shape != (rows.size, bank.features.shape[1]) or probs.shape != (
        rows.size,
        bank.probs.shape[1],
    ):
        raise DataError("Bank update rows do not match the bank's widths.")

    new_features = bank.features.copy()
    new_unit = bank.unit_features.copy()
    new_probs = bank.probs.copy()
    initialized = bank.initialized.copy()
    new_features[rows] = features
    new_unit[rows] = l2_normalize(features)
    new_probs[rows] = probs
    initialized[rows] = True
    return MemoryBank(
        features=new_features,
        unit_features=new_unit,
        probs=new_probs,
        initialized=initialized,
    )


def knn_neighbor_indices(bank: MemoryBank, query_indices: npt.ArrayLike, k: int) -> IndexArray:
    """k most cosine-similar bank rows per query, self excluded, ties to lower index."""
    if not bank.ready:
        raise DataError("Memory bank has uninitialized rows.")
    if not 1 <= k < bank.num_samples:
        raise DataError(f"k must lie in [1, {bank.num_samples - 1}], got {k}.")
    queries = np.asarray(query_indices, dtype=np.int64).reshape(-1)
    if queries.size and (queries.min() < 0 or queries.max() >= bank.num_samples):
        raise DataError("Query index out of range.")

    similarities = np.round(
        bank.unit_features[queries] @ bank.unit_features.T, SIMILARITY_DECIMALS
    )
    similarities[np.arange(queries.size), queries] = -np.inf
    order = np.argsort(-similarities, axis=1, kind="stable")
    return order[:, :k].astype(np.int64)


def knn_neighbor_targets(bank: MemoryBank, query_indices: npt.ArrayLike, k: int) -> Matrix:
    """l^i = mean prob row of the k nearest neighbours of bank row i."""
    neighbors = knn_neighbor_indices(bank, query_indices, k)
    return bank.probs[neighbors].mean(axis=1)


def local_loss(batch_probs: Matrix, neighbor_targets: Matrix) -> float:
    return soft_ce_loss(batch_probs, neighbor_targets)
