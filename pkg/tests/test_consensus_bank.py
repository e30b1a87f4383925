import numpy as np
import pytest

from glc.core.errors import DataError
from glc.core.numeric import make_rng, softmax
from glc.services.consensus import (
    SIMILARITY_DECIMALS,
    bank_init,
    bank_update,
    knn_neighbor_indices,
    knn_neighbor_targets,
    local_loss,
)
from glc.services.network import forward, soft_ce_loss, zeros_like


def _degrees(*angles: float) -> np.ndarray:
    radians = np.deg2rad(angles)
    return np.stack([np.cos(radians), np.sin(radians)], axis=1)


def test_init_reads_back_exactly(rng: np.random.Generator) -> None:
    features = rng.normal(size=(5, 3))
    probs = softmax(rng.normal(size=(5, 4)))

    bank = bank_init(features, probs)

    np.testing.assert_array_equal(bank.features, features)
    np.testing.assert_array_equal(bank.probs, probs)
    assert bank.ready and bank.num_samples == 5
    assert bank_init(features[:1], probs[:1]).num_samples == 1


def test_init_from_zero_model_holds_uniform_rows(small_params, rng: np.random.Generator) -> None:
    passed = forward(zeros_like(small_params), rng.normal(size=(6, 6)))

    # Zero features would be un-normalizable; only the prob rows matter here.
    bank = bank_init(np.ones((6, 4)), passed.probs)

    np.testing.assert_allclose(bank.probs, 1 / 3, atol=1e-15)


def test_init_rejects_mismatched_rows() -> None:
    with pytest.raises(DataError):
        bank_init(np.ones((3, 2)), np.full((2, 2), 0.5))


def test_update_replaces_only_listed_rows(rng: np.random.Generator) -> None:
    bank = bank_init(rng.normal(size=(4, 3)), softmax(rng.normal(size=(4, 2))))
    new_feature = np.array([[1.0, 2.0, 3.0]])
    new_prob = np.array([[0.25, 0.75]])

    assert bank_update(bank, [], np.zeros((0, 3)), np.zeros((0, 2))) is bank
    updated = bank_update(bank, [0], new_feature, new_prob)

    np.testing.assert_array_equal(updated.features[0], new_feature[0])
    np.testing.assert_array_equal(updated.probs[0], new_prob[0])
    np.testing.assert_array_equal(updated.features[1:], bank.features[1:])
    np.testing.assert_array_equal(updated.probs[1:], bank.probs[1:])


def test_disjoint_updates_commute(rng: np.random.Generator) -> None:
    bank = bank_init(rng.normal(size=(6, 3)), softmax(rng.normal(size=(6, 2))))
    first = (np.array([0, 2]), rng.normal(size=(2, 3)), softmax(rng.normal(size=(2, 2))))
    second = (np.array([5]), rng.normal(size=(1, 3)), softmax(rng.normal(size=(1, 2))))

    left = bank_update(bank_update(bank, *first), *second)
    right = bank_update(bank_update(bank, *second), *first)

    np.testing.assert_array_equal(left.features, right.features)
    np.testing.assert_array_equal(left.unit_features, right.unit_features)
    np.testing.assert_array_equal(left.probs, right.probs)


def test_update_rejects_bad_indices(rng: np.random.Generator) -> None:
    bank = bank_init(rng.normal(size=(3, 2)), np.full((3, 2), 0.5))

    with pytest.raises(DataError):
        bank_update(bank, [0, 0], np.ones((2, 2)), np.full((2, 2), 0.5))
    with pytest.raises(DataError):
        bank_update(bank, [3], np.ones((1, 2)), np.full((1, 2), 0.5))


def test_identical_prob_rows_give_that_row(rng: np.random.Generator) -> None:
    row = np.array([0.2, 0.3, 0.5])
    bank = bank_init(rng.normal(size=(9, 4)), np.tile(row, (9, 1)))

    targets = knn_neighbor_targets(bank, np.arange(9), 4)

    np.testing.assert_allclose(targets, np.tile(row, (9, 1)), atol=1e-15)


def test_nearest_angle_wins() -> None:
    probs = np.array([[0.9, 0.1], [0.3, 0.7], [0.5, 0.5]])
    bank = bank_init(_degrees(0.0, 1.0, 90.0), probs)

    assert knn_neighbor_indices(bank, [0], 1).tolist() == [[1]]
    np.testing.assert_array_equal(knn_neighbor_targets(bank, [0], 1), probs[[1]])


def test_k_must_leave_a_neighbour_out(rng: np.random.Generator) -> None:
    bank = bank_init(rng.normal(size=(4, 2)), np.full((4, 2), 0.5))

    with pytest.raises(DataError):
        knn_neighbor_targets(bank, [0], 4)


def test_matches_sort_oracle() -> None:
    for instance in range(50):
        rng = make_rng(instance, 16)
        n = int(rng.integers(5, 501))
        features = rng.normal(size=(n, int(rng.integers(2, 9))))
        probs = softmax(rng.normal(size=(n, 3)))
        bank = bank_init(features, probs)

        targets = knn_neighbor_targets(bank, np.arange(n), 4)
        neighbors = knn_neighbor_indices(bank, np.arange(n), 4)

        similarities = np.round(bank.unit_features @ bank.unit_features.T, SIMILARITY_DECIMALS)
        for i in range(n):
            sims = similarities[i]
            others = np.delete(np.arange(n), i)
            # lexsort keys run last-primary: similarity descending, then index.
            ranked = others[np.lexsort((others, -sims[others]))][:4]
            np.testing.assert_array_equal(neighbors[i], ranked)
            np.testing.assert_allclose(targets[i], probs[ranked].mean(axis=0), rtol=0, atol=1e-15)


@pytest.mark.parametrize(
    "scales",
    [
        [2.0**j for j in range(7)],
        [1.0, 3.0, 0.1, 7.3, 1.7, 11.0, 0.3],
    ],
)
def test_ties_go_to_the_lower_index(scales: list[float]) -> None:
    direction = np.array([1.0, 3.0, 7.0, 0.1])
    features = np.stack([scale * direction for scale in scales])
    bank = bank_init(features, softmax(make_rng(0, 16).normal(size=(7, 2))))

    neighbors = knn_neighbor_indices(bank, np.arange(7), 3)

    for i in range(7):
        assert neighbors[i].tolist() == [j for j in range(7) if j != i][:3]


def test_local_loss_is_soft_cross_entropy() -> None:
    assert local_loss(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]])) == 0.0
    assert local_loss(np.full((1, 2), 0.5), np.full((1, 2), 0.5)) == pytest.approx(np.log(2.0))
    probs, targets = np.array([[0.6, 0.4]]), np.array([[0.25, 0.75]])
    assert local_loss(probs, targets) == soft_ce_loss(probs, targets)
    expected = -(0.25 * np.log(0.6) + 0.75 * np.log(0.4))
    assert local_loss(probs, targets) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.8149244548, abs=1e-10)
