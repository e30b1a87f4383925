from concurrent.futures import ThreadPoolExecutor
import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist
from sklearn.cluster import kmeans_plusplus
from sklearn.metrics import silhouette_samples

from glc.core.errors import DataError
from glc.core.logger import event_message
from glc.core.numeric import (
    DistanceMetric,
    IndexArray,
    Matrix,
    RngState,
    Vector,
    ensure_finite,
    l2_normalize,
    pairwise_distance,
    round_half_up,
    seed_from,
    spawn_streams,
)
from glc.models.models import ClassCountEstimate, KMeansResult
from glc.observability.events import LogEvent

logger = logging.getLogger(__name__)


def _reseed_empty_clusters(
    sq_dists: Matrix, assignments: IndexArray, k: int
) -> IndexArray:
    counts = np.bincount(assignments, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return assignments
    assignments = assignments.copy()
    own = sq_dists[np.arange(assignments.size), assignments].copy()
    for cluster in empty:
        # Only donors from clusters with a spare member keep every cluster non-empty.
        eligible = counts[assignments] > 1
        candidates = np.where(eligible, own, -np.inf)
        donor = int(np.argmax(candidates))
        counts[assignments[donor]] -= 1
        counts[cluster] += 1
        assignments[donor] = cluster
        own[donor] = -np.inf
        logger.warning(
            event_message(
                LogEvent.KMEANS_EMPTY_CLUSTER, cluster=int(cluster), donor=donor
            )
        )
    return assignments


def _centroids(X: Matrix, assignments: IndexArray, k: int) -> Matrix:
    return np.stack([X[assignments == cluster].mean(axis=0) for cluster in range(k)])


def _inertia(X: Matrix, centroids: Matrix, assignments: IndexArray) -> float:
    return float(((X - centroids[assignments]) ** 2).sum())


def _lloyd(
    X: Matrix, k: int, rng: RngState, max_iters: int, tol: float
) -> KMeansResult:
    centroids, _ = kmeans_plusplus(X, n_clusters=k, random_state=seed_from(rng))
    centroids = np.asarray(centroids, dtype=np.float64)
    assignments: IndexArray | None = None
    history: list[float] = []
    previous = math.inf
    iterations = 0
    for iterations in range(1, max_iters + 1):
        sq_dists = cdist(X, centroids, metric="sqeuclidean")
        updated = _reseed_empty_clusters(
            sq_dists, np.argmin(sq_dists, axis=1).astype(np.int64), k
        )
        centroids = _centroids(X, updated, k)
        inertia = _inertia(X, centroids, updated)
        history.append(inertia)
        stable = assignments is not None and np.array_equal(assignments, updated)
        assignments = updated
        if stable or previous - inertia < tol:
            break
        previous = inertia
    assert assignments is not None
    return KMeansResult(
        centroids=centroids,
        assignments=assignments,
        inertia=history[-1],
        inertia_history=tuple(history),
        iterations=iterations,
    )


def kmeans(
    X: Matrix,
    k: int,
    rng: RngState,
    max_iters: int = 100,
    tol: float = 1e-6,
    n_init: int = 1,
) -> KMeansResult:
    """Lloyd iterations from k-means++ seeds; best of ``n_init`` restarts.

    An emptied cluster takes the point farthest from its own centroid.
    """
    data = np.asarray(X, dtype=np.float64)
    if data.ndim != 2:
        raise DataError(f"Expected a 2-D matrix, got shape {data.shape}.")
    ensure_finite(data, "K-means input")
    if k < 1:
        raise DataError(f"k must be at least 1, got {k}.")
    if k > data.shape[0]:
        raise DataError(f"k={k} exceeds the number of samples {data.shape[0]}.")
    if n_init < 1 or max_iters < 1:
        raise DataError("n_init and max_iters must be positive.")

    best: KMeansResult | None = None
    for stream in spawn_streams(rng, n_init):
        result = _lloyd(data, k, stream, max_iters, tol)
        if best is None or result.inertia < best.inertia:
            best = result
    assert best is not None
    return best


def silhouette_from_distances(D: Matrix, assignments: npt.ArrayLike) -> Vector:
    labels = np.asarray(assignments)
    if labels.ndim != 1 or labels.size != D.shape[0]:
        raise DataError("Assignments must have one entry per row.")
    n_clusters = np.unique(labels).size
    if n_clusters < 2:
        raise DataError("Silhouette needs at least two non-empty clusters.")
    if n_clusters == labels.size:
        # Every point is a singleton.
        return np.zeros(labels.size, dtype=np.float64)
    values = silhouette_samples(D, labels, metric="precomputed")
    return np.clip(np.asarray(values, dtype=np.float64), -1.0, 1.0)


def silhouette_values(
    X: Matrix,
    assignments: npt.ArrayLike,
    metric: DistanceMetric | str = DistanceMetric.COSINE,
) -> Vector:
    """Per-sample (b - a) / max(a, b); members of singleton clusters get 0."""
    return silhouette_from_distances(pairwise_distance(X, metric), assignments)


def candidate_class_counts(num_source_classes: int, num_samples: int) -> tuple[int, ...]:
    """C_s/3, C_s/2, C_s, 2C_s, 3C_s rounded half-up, clamped to [2, N], deduplicated."""
    if num_samples < 2:
        raise DataError("Class-count estimation needs at least two samples.")
    if num_source_classes < 1:
        raise DataError("The source model must have at least one class.")
    raw = (
        round_half_up(num_source_classes / 3),
        round_half_up(num_source_classes / 2),
        num_source_classes,
        2 * num_source_classes,
        3 * num_source_classes,
    )
    return tuple(sorted({min(max(value, 2), num_samples) for value in raw}))


def estimate_class_count(
    X: Matrix,
    num_source_classes: int,
    rng: RngState,
    *,
    metric: DistanceMetric | str = DistanceMetric.COSINE,
    normalize: bool = True,
    n_init: int = 1,
    max_iters: int = 100,
    tol: float = 1e-6,
    workers: int = 1,
) -> ClassCountEstimate:
    """Pick the candidate C̃_t whose k-means partition has the best mean silhouette.

    Ties go to the smallest candidate. Each candidate clusters on its own child
    stream, so threaded and sequential runs agree.
    """
    data = np.asarray(X, dtype=np.float64)
    candidates = candidate_class_counts(num_source_classes, data.shape[0])
    if normalize:
        data = l2_normalize(data)
    distances = pairwise_distance(data, metric)
    streams = spawn_streams(rng, len(candidates))

    def _score(candidate: int, stream: RngState) -> float:
        result = kmeans(data, candidate, stream, max_iters=max_iters, tol=tol, n_init=n_init)
        return float(silhouette_from_distances(distances, result.assignments).mean())

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(_score, candidates, streams))
    else:
        scores = [_score(candidate, stream) for candidate, stream in zip(candidates, streams)]

    chosen, best = candidates[0], scores[0]
    for candidate, score in zip(candidates[1:], scores[1:]):
        if score > best:
            chosen, best = candidate, score
    logger.info(
        event_message(
            LogEvent.CLASS_COUNT_ESTIMATED,
            chosen=chosen,
            candidates=",".join(str(c) for c in candidates),
            best_silhouette=best,
        )
    )
    return ClassCountEstimate(chosen=chosen, candidate_scores=tuple(zip(candidates, scores)))
