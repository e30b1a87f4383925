import csv
import logging
import math
from pathlib import Path

import numpy as np

from glc.core.errors import DataError
from glc.core.logger import event_message
from glc.models.models import LabeledDataset
from glc.observability.events import LogEvent

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"


def _header(input_dim: int) -> list[str]:
    return [f"f{index}" for index in range(input_dim)] + [LABEL_COLUMN]


def save_csv(dataset: LabeledDataset, path: Path) -> None:
    """Write ``f0..f{d-1},label`` rows; floats keep 17 significant digits."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(_header(dataset.input_dim))
            for row, label in zip(dataset.X, dataset.y):
                writer.writerow([f"{value:.17g}" for value in row] + [int(label)])
    except OSError as exc:
        raise DataError(f"Failed to write dataset {path}: {exc}") from exc
    logger.info(
        event_message(
            LogEvent.DATASET_SAVED,
            path=path,
            samples=dataset.num_samples,
            classes=len(dataset.classes()),
        )
    )


def _parse_header(header: list[str], path: Path) -> int:
    if len(header) < 2 or header[-1] != LABEL_COLUMN:
        raise DataError(f"{path}:1: header must end with '{LABEL_COLUMN}'.")
    input_dim = len(header) - 1
    if header != _header(input_dim):
        raise DataError(f"{path}:1: expected columns f0..f{input_dim - 1},label.")
    return input_dim


def load_csv(path: Path) -> LabeledDataset:
    if not path.exists():
        raise DataError(f"Dataset not found: {path}")
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"Failed to read dataset {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: file is empty, expected a header line.")

    input_dim = _parse_header(rows[0], path)
    features: list[list[float]] = []
    labels: list[int] = []
    for line_number, row in enumerate(rows[1:], start=2):
        if len(row) != input_dim + 1:
            raise DataError(
                f"{path}:{line_number}: expected {input_dim + 1} columns, got {len(row)}."
            )
        try:
            values = [float(cell) for cell in row[:-1]]
            label = int(row[-1])
        except ValueError as exc:
            raise DataError(f"{path}:{line_number}: non-numeric value ({exc}).") from exc
        if not all(math.isfinite(value) for value in values):
            raise DataError(f"{path}:{line_number}: non-finite feature value.")
        if label < 0:
            raise DataError(f"{path}:{line_number}: negative label {label}.")
        features.append(values)
        labels.append(label)

    dataset = LabeledDataset(
        X=np.asarray(features, dtype=np.float64).reshape(len(features), input_dim),
        y=np.asarray(labels, dtype=np.int64),
    )
    logger.info(
        event_message(LogEvent.DATASET_LOADED, path=path, samples=dataset.num_samples)
    )
    return dataset
