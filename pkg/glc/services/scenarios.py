"""Synthetic Gaussian-blob scenarios with a category shift and a domain shift.

Global labels run shared, then source-private, then target-private. The source
sees classes below C_s; the target sees the shared classes plus the
target-private block. Every random step draws from its own named stream.
"""

import logging
import math

import numpy as np

from glc.core.errors import UsageError
from glc.core.logger import event_message
from glc.core.numeric import Matrix, RngState, make_rng
from glc.models.models import ClassRole, LabeledDataset
from glc.models.schemas import ScenarioSpec
from glc.observability.events import LogEvent

logger = logging.getLogger(__name__)

MAX_DRAWS_PER_CLASS = 2000
RADIUS_GROWTH = 1.25


def class_roles(spec: ScenarioSpec) -> dict[int, ClassRole]:
    roles = {label: ClassRole.SHARED for label in range(spec.shared)}
    roles.update(
        {label: ClassRole.SOURCE_PRIVATE for label in range(spec.shared, spec.num_source_classes)}
    )
    roles.update(
        {
            label: ClassRole.TARGET_PRIVATE
            for label in range(spec.num_source_classes, spec.total_classes)
        }
    )
    return roles


def _unit_direction(rng: RngState, dim: int) -> np.ndarray:
    while True:
        draw = rng.standard_normal(dim)
        norm = float(np.linalg.norm(draw))
        if norm > 0.0:
            return draw / norm


def draw_class_means(count: int, dim: int, min_distance: float, rng: RngState) -> Matrix:
    """Points on a sphere with pairwise distance ≥ ``min_distance``.

    Rejection sampling one class at a time; the radius grows whenever a class
    cannot be placed.
    """
    radius = min_distance
    while True:
        means: list[np.ndarray] = []
        for _ in range(count):
            for _ in range(MAX_DRAWS_PER_CLASS):
                candidate = radius * _unit_direction(rng, dim)
                if all(np.linalg.norm(candidate - other) >= min_distance for other in means):
                    means.append(candidate)
                    break
            else:
                break
        if len(means) == count:
            return np.asarray(means, dtype=np.float64).reshape(count, dim)
        radius *= RADIUS_GROWTH


def rotation_matrix(dim: int, angle_deg: float, rng: RngState) -> Matrix:
    """Rotate by ``angle_deg`` in ⌊d/2⌋ planes of a random orthonormal basis."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.where(np.diag(r) < 0.0, -1.0, 1.0)
    if angle_deg == 0.0:
        return np.eye(dim)
    theta = math.radians(angle_deg)
    block = np.eye(dim)
    cos, sin = math.cos(theta), math.sin(theta)
    for plane in range(dim // 2):
        i, j = 2 * plane, 2 * plane + 1
        block[i, i], block[i, j] = cos, -sin
        block[j, i], block[j, j] = sin, cos
    return q @ block @ q.T


def _samples(
    centers: Matrix, labels: list[int], per_class: int, noise_std: float, rng: RngState
) -> tuple[Matrix, np.ndarray]:
    dim = centers.shape[1]
    rows = [
        centers[label] + noise_std * rng.standard_normal((per_class, dim)) for label in labels
    ]
    X = np.concatenate(rows) if rows else np.zeros((0, dim))
    y = np.repeat(np.asarray(labels, dtype=np.int64), per_class)
    return X, y


def generate_scenario(spec: ScenarioSpec) -> tuple[LabeledDataset, LabeledDataset]:
    if spec.total_classes < 2:
        raise UsageError("A scenario needs at least two classes in total.")
    means = draw_class_means(
        spec.total_classes,
        spec.input_dim,
        spec.separation * spec.noise_std,
        make_rng(spec.seed, "class-means"),
    )

    shift_rng = make_rng(spec.seed, "domain-shift")
    rotation = rotation_matrix(spec.input_dim, spec.rotation_deg, shift_rng)
    mean_norm = float(np.linalg.norm(means, axis=1).mean())
    translation = spec.translation_scale * mean_norm * _unit_direction(shift_rng, spec.input_dim)
    shifted_means = means @ rotation.T + translation

    roles = class_roles(spec)
    source_labels = list(range(spec.num_source_classes))
    target_labels = list(range(spec.shared)) + list(
        range(spec.num_source_classes, spec.total_classes)
    )
    source_X, source_y = _samples(
        means,
        source_labels,
        spec.source_per_class,
        spec.noise_std,
        make_rng(spec.seed, "source-samples"),
    )
    target_X, target_y = _samples(
        shifted_means,
        target_labels,
        spec.target_per_class,
        spec.noise_std * spec.target_noise_scale,
        make_rng(spec.seed, "target-samples"),
    )
    source = LabeledDataset(
        X=source_X, y=source_y, roles={label: roles[label] for label in source_labels}
    )
    target = LabeledDataset(
        X=target_X, y=target_y, roles={label: roles[label] for label in target_labels}
    )
    logger.info(
        event_message(
            LogEvent.SCENARIO_GENERATED,
            scenario=spec.scenario.value,
            source_classes=len(source_labels),
            target_classes=len(target_labels),
            seed=spec.seed,
        )
    )
    return source, target
