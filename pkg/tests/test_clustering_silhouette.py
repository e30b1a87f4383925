import numpy as np
import pytest

from conftest import make_axis_blobs
from glc.core.errors import DataError
from glc.core.numeric import make_rng
from glc.services.clustering import (
    candidate_class_counts,
    estimate_class_count,
    silhouette_values,
)


def _naive_silhouette(X: np.ndarray, labels: np.ndarray, metric: str) -> np.ndarray:
    if metric == "cosine":
        unit = X / np.sqrt((X**2).sum(axis=1))[:, None]
        D = 1.0 - np.einsum("id,jd->ij", unit, unit)
    else:
        D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    values = np.zeros(len(X))
    for i in range(len(X)):
        own = labels == labels[i]
        if own.sum() == 1:
            continue
        a = D[i, own].sum() / (own.sum() - 1)
        b = min(D[i, labels == other].mean() for other in set(labels.tolist()) - {labels[i]})
        values[i] = (b - a) / max(a, b)
    return values


def test_one_dimensional_hand_example() -> None:
    X = np.array([[0.0], [0.1], [10.0], [10.1]])

    values = silhouette_values(X, [0, 0, 1, 1], "euclidean")

    assert values[0] == pytest.approx(0.99004975, abs=1e-8)


def test_singleton_members_score_zero() -> None:
    X = np.array([[0.0, 1.0], [0.0, 1.1], [5.0, 0.0]])

    values = silhouette_values(X, [0, 0, 1], "euclidean")

    assert values[2] == 0.0


def test_single_cluster_is_rejected() -> None:
    with pytest.raises(DataError):
        silhouette_values(np.eye(3), [0, 0, 0])


@pytest.mark.parametrize("metric", ["cosine", "euclidean"])
def test_matches_naive_oracle(metric: str) -> None:
    for instance in range(50):
        rng = make_rng(instance, 13)
        n = int(rng.integers(10, 201))
        k = int(rng.integers(2, 9))
        X = rng.normal(size=(n, int(rng.integers(2, 17))))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])

        values = silhouette_values(X, labels, metric)

        np.testing.assert_allclose(values, _naive_silhouette(X, labels, metric), atol=1e-9)
        assert np.all((values >= -1.0) & (values <= 1.0))


def test_relabeling_clusters_leaves_values_unchanged(rng: np.random.Generator) -> None:
    X = rng.normal(size=(30, 4))
    labels = np.arange(30) % 3

    np.testing.assert_array_equal(
        silhouette_values(X, labels), silhouette_values(X, (labels + 1) % 3)
    )


def test_candidate_lists() -> None:
    assert candidate_class_counts(6, 500) == (2, 3, 6, 12, 18)
    assert candidate_class_counts(10, 500) == (3, 5, 10, 20, 30)
    assert candidate_class_counts(2, 500) == (2, 4, 6)
    assert candidate_class_counts(6, 10) == (2, 3, 6, 10)
    with pytest.raises(DataError):
        candidate_class_counts(6, 1)


def test_estimation_finds_twelve_blobs_for_six_source_classes() -> None:
    X, _ = make_axis_blobs(12, 12, seed=0, noise=0.3)

    estimate = estimate_class_count(X, 6, make_rng(0, "estimate"))

    assert estimate.chosen == 12
    assert [candidate for candidate, _ in estimate.candidate_scores] == [2, 3, 6, 12, 18]


def test_estimation_is_identical_across_worker_counts() -> None:
    X, _ = make_axis_blobs(6, 10, seed=1, noise=0.3)

    sequential = estimate_class_count(X, 6, make_rng(4, "estimate"), workers=1)
    threaded = estimate_class_count(X, 6, make_rng(4, "estimate"), workers=3)

    assert sequential == threaded
    assert sequential.chosen == 6


@pytest.mark.slow
@pytest.mark.parametrize("num_source_classes", [6, 10])
def test_estimation_recovers_true_count_across_seeds(num_source_classes: int) -> None:
    for truth in candidate_class_counts(num_source_classes, 10_000):
        hits = 0
        for seed in range(10):
            X, _ = make_axis_blobs(truth, 12, seed=seed, noise=0.3)
            chosen = estimate_class_count(
                X, num_source_classes, make_rng(seed, "estimate")
            ).chosen
            hits += chosen == truth
        assert hits >= 9, (num_source_classes, truth, hits)
