import numpy as np
import pytest
from pydantic import ValidationError

from glc.core.numeric import make_rng
from glc.models.models import ClassRole
from glc.models.schemas import EvalProtocol, ScenarioSpec
from glc.services.scenarios import draw_class_means, generate_scenario, rotation_matrix


def _class_means(X: np.ndarray, y: np.ndarray) -> dict[int, np.ndarray]:
    return {int(label): X[y == label].mean(axis=0) for label in np.unique(y)}


def test_open_partial_split_shapes() -> None:
    spec = ScenarioSpec(scenario="opda", shared=10, source_private=10, target_private=11, seed=7)

    source, target = generate_scenario(spec)

    assert source.classes() == tuple(range(20))
    assert target.classes() == tuple(range(10)) + tuple(range(20, 31))
    assert len(set(source.classes()) & set(target.classes())) == 10
    assert source.num_samples == 20 * spec.source_per_class
    assert target.num_samples == 21 * spec.target_per_class
    assert np.all(np.bincount(target.y)[list(target.classes())] == spec.target_per_class)
    assert spec.protocol is EvalProtocol.H_SCORE


def test_roles_follow_label_blocks() -> None:
    source, target = generate_scenario(ScenarioSpec(scenario="opda", seed=1))

    assert {source.roles[label] for label in range(10)} == {ClassRole.SHARED}
    assert {source.roles[label] for label in range(10, 20)} == {ClassRole.SOURCE_PRIVATE}
    assert {target.roles[label] for label in range(20, 31)} == {ClassRole.TARGET_PRIVATE}
    assert not set(target.roles) & set(range(10, 20))


def test_scenario_defaults_fill_the_split() -> None:
    assert ScenarioSpec(scenario="pda").target_private == 0
    assert ScenarioSpec(scenario="osda").source_private == 0
    clda = ScenarioSpec(scenario="clda", shared=4)
    assert (clda.num_source_classes, clda.num_target_classes) == (4, 4)
    assert clda.protocol is EvalProtocol.ACCURACY


@pytest.mark.parametrize(
    "fields",
    [
        {"scenario": "pda", "target_private": 3},
        {"scenario": "osda", "source_private": 2},
        {"scenario": "clda", "source_private": 1},
        {"scenario": "opda", "target_private": 0},
        {"scenario": "opda", "input_dim": 1},
        {"scenario": "opda", "unknown_field": 1},
    ],
)
def test_inconsistent_specs_are_rejected(fields: dict) -> None:
    with pytest.raises(ValidationError):
        ScenarioSpec(**fields)


def test_same_seed_gives_identical_datasets() -> None:
    spec = ScenarioSpec(scenario="osda", input_dim=5, source_per_class=8, target_per_class=8, seed=3)

    first_source, first_target = generate_scenario(spec)
    second_source, second_target = generate_scenario(spec)

    np.testing.assert_array_equal(first_source.X, second_source.X)
    np.testing.assert_array_equal(first_target.X, second_target.X)
    np.testing.assert_array_equal(first_target.y, second_target.y)
    other_source, _ = generate_scenario(spec.model_copy(update={"seed": 4}))
    assert not np.array_equal(first_source.X, other_source.X)


def test_no_shift_limit_keeps_class_means() -> None:
    common = {"scenario": "clda", "shared": 3, "input_dim": 4, "source_per_class": 2000, "target_per_class": 2000}
    still = ScenarioSpec(**common, rotation_deg=0.0, translation_scale=0.0, seed=2)
    shifted = ScenarioSpec(**common, rotation_deg=60.0, translation_scale=0.5, seed=2)

    source, target = generate_scenario(still)
    _, moved = generate_scenario(shifted)

    source_means = _class_means(source.X, source.y)
    for label, mean in _class_means(target.X, target.y).items():
        # Standard error of each coordinate is 1/sqrt(2000).
        assert np.abs(mean - source_means[label]).max() < 0.15
    moved_means = _class_means(moved.X, moved.y)
    assert max(np.linalg.norm(moved_means[label] - source_means[label]) for label in range(3)) > 1.0


def test_class_means_respect_minimum_distance() -> None:
    means = draw_class_means(31, 10, 8.0, make_rng(0, "class-means"))

    gaps = np.linalg.norm(means[:, None, :] - means[None, :, :], axis=2)
    assert gaps[~np.eye(31, dtype=bool)].min() >= 8.0


@pytest.mark.parametrize("dim", [2, 5, 10])
def test_rotation_is_proper_and_turns_by_the_angle(dim: int) -> None:
    rotation = rotation_matrix(dim, 25.0, make_rng(0, "domain-shift"))

    np.testing.assert_allclose(rotation @ rotation.T, np.eye(dim), atol=1e-12)
    assert np.linalg.det(rotation) == pytest.approx(1.0)
    expected_trace = dim - 2 * (dim // 2) * (1.0 - np.cos(np.deg2rad(25.0)))
    assert np.trace(rotation) == pytest.approx(expected_trace)
    np.testing.assert_array_equal(rotation_matrix(dim, 0.0, make_rng(0, "domain-shift")), np.eye(dim))
