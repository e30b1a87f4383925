from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from glc.core.errors import DataError

if TYPE_CHECKING:
    from glc.services.types import (
        AdaptHistory,
        EvaluationReport,
        PseudoLabelResult,
        SweepCellResult,
    )

HISTORY_COLUMNS: tuple[str, ...] = (
    "epoch",
    "loss_glb",
    "loss_loc",
    "loss_tar",
    "h_score",
    "acc_known",
    "acc_unknown",
    "c_t_hat",
    "unknown_fraction",
)
METRICS_COLUMNS: tuple[str, ...] = (
    "checkpoint",
    "data",
    "protocol",
    "omega",
    "h_score",
    "acc_known",
    "acc_unknown",
    "accuracy",
)
SWEEP_COLUMNS: tuple[str, ...] = (
    "seed",
    "variant",
    "eta",
    "rho",
    "omega",
    "c_t_hat",
    "h_score",
    "acc_known",
    "acc_unknown",
    "accuracy",
)
PSEUDO_DUMP_COLUMNS: tuple[str, ...] = ("sample", "claimed_class", "score")

Cell = str | int | float | None


def _format(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if np.isnan(value) else repr(float(value))
    return str(value)


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([_format(value) for value in row] for row in rows)
    except OSError as exc:
        raise DataError(f"Failed to write {path}: {exc}") from exc


def append_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> None:
    """Append to a metrics CSV, writing the header only if the file has none.

    An existing file with a different header is refused.
    """
    try:
        existing = path.read_text(encoding="utf-8") if path.exists() else ""
    except OSError as exc:
        raise DataError(f"Failed to read {path}: {exc}") from exc
    first_line = existing.split("\n", 1)[0]
    expected = ",".join(header)
    if existing and first_line != expected:
        raise DataError(f"{path}: header {first_line!r} does not match {expected!r}.")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8", newline="") as handle:
            if existing and not existing.endswith("\n"):
                handle.write("\n")
            writer = csv.writer(handle, lineterminator="\n")
            if not existing:
                writer.writerow(header)
            writer.writerows([_format(value) for value in row] for row in rows)
    except OSError as exc:
        raise DataError(f"Failed to append to {path}: {exc}") from exc


def write_history_csv(history: AdaptHistory, path: Path) -> None:
    write_rows(
        path,
        HISTORY_COLUMNS,
        (
            (
                record.epoch,
                record.loss_glb,
                record.loss_loc,
                record.loss_tar,
                record.h_score,
                record.acc_known,
                record.acc_unknown,
                record.c_t_hat,
                record.unknown_fraction,
            )
            for record in history.records
        ),
    )


def metrics_row(checkpoint: Path, data: Path, report: EvaluationReport) -> tuple[Cell, ...]:
    return (
        str(checkpoint),
        str(data),
        report.protocol.value,
        report.omega,
        report.h_score,
        report.acc_known,
        report.acc_unknown,
        report.accuracy,
    )


def sweep_rows(result: SweepCellResult) -> list[tuple[Cell, ...]]:
    cell = result.cell
    return [
        (
            cell.seed,
            cell.variant.value,
            cell.eta,
            cell.rho,
            report.omega,
            result.c_t_hat,
            report.h_score,
            report.acc_known,
            report.acc_unknown,
            report.accuracy,
        )
        for report in result.reports
    ]


def write_pseudo_label_dump(result: PseudoLabelResult, path: Path) -> None:
    write_rows(
        path,
        PSEUDO_DUMP_COLUMNS,
        (
            (index, int(claimed), float(score))
            for index, (claimed, score) in enumerate(zip(result.claimed, result.scores))
        ),
    )
