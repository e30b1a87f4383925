import os

import numpy as np
import pytest

os.environ.setdefault("GLC_LOG_LEVEL", "WARNING")
os.environ["GLC_SWEEP_WORKERS"] = "1"
os.environ["GLC_ESTIMATE_WORKERS"] = "1"

from glc.core.numeric import make_rng  # noqa: E402
from glc.models.models import LabeledDataset, ModelParams  # noqa: E402
from glc.services.network import init_params  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(1234)


@pytest.fixture
def small_params() -> ModelParams:
    """6 → 8 → 4 → 3 network."""
    return init_params(6, 8, 4, 3, make_rng(7, "init"))


def make_axis_blobs(
    count: int, per_blob: int, seed: int, *, noise: float = 0.05, scale: float = 10.0
) -> tuple[np.ndarray, np.ndarray]:
    """``count`` tight blobs centred on scaled orthogonal axes; angular separation 90°."""
    generator = make_rng(seed, 99)
    centers = scale * np.eye(count)
    X = np.concatenate(
        [center + noise * generator.standard_normal((per_blob, count)) for center in centers]
    )
    y = np.repeat(np.arange(count), per_blob)
    return X, y


@pytest.fixture
def two_blobs() -> LabeledDataset:
    """Two linearly separable 2-D blobs, 100 samples each."""
    generator = make_rng(3, 98)
    left = np.array([-5.0, 0.0]) + 0.5 * generator.standard_normal((100, 2))
    right = np.array([5.0, 0.0]) + 0.5 * generator.standard_normal((100, 2))
    return LabeledDataset(
        X=np.concatenate([left, right]),
        y=np.repeat(np.arange(2, dtype=np.int64), 100),
    )
