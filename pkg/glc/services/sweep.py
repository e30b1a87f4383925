"""Hyper-parameter grid over (seed, variant, η, ρ), scored at every ω."""

from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
import csv
from functools import partial
import itertools
import logging
from pathlib import Path

from glc.core.errors import DataError, GLCError
from glc.core.logger import event_message
from glc.infrastructure.reports import SWEEP_COLUMNS, append_rows, sweep_rows
from glc.models.models import LabeledDataset, ModelParams
from glc.models.schemas import AdaptConfig, SweepConfig, Variant
from glc.observability.events import LogEvent
from glc.observability.metrics import get_app_metrics
from glc.services.adaptation import ablation_variant, adapt
from glc.services.evaluation import evaluate_params
from glc.services.types import SweepCell, SweepCellResult

logger = logging.getLogger(__name__)

CellKey = tuple[str, str, str, str]


def build_grid(config: SweepConfig) -> list[SweepCell]:
    """Cells in row order: seed, then variant, then η, then ρ."""
    return [
        SweepCell(index=index, seed=seed, variant=variant, eta=eta, rho=rho)
        for index, (seed, variant, eta, rho) in enumerate(
            itertools.product(config.seeds, config.variants, config.etas, config.rhos)
        )
    ]


def _cell_key(cell: SweepCell) -> CellKey:
    return (str(cell.seed), cell.variant.value, repr(cell.eta), repr(cell.rho))


def completed_cells(path: Path, omegas: tuple[float, ...]) -> set[CellKey]:
    """Cells whose rows for every ω are already in ``path``."""
    if not path.exists():
        return set()
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            header = tuple(reader.fieldnames or ())
            rows = list(reader)
    except (OSError, csv.Error) as exc:
        raise DataError(f"Failed to read sweep metrics {path}: {exc}") from exc
    if header and header != SWEEP_COLUMNS:
        raise DataError(
            f"{path}: header {','.join(header)!r} does not match {','.join(SWEEP_COLUMNS)!r}."
        )
    seen: dict[CellKey, set[str]] = {}
    for row in rows:
        key = (row["seed"], row["variant"], row["eta"], row["rho"])
        seen.setdefault(key, set()).add(row["omega"])
    wanted = {repr(omega) for omega in omegas}
    return {key for key, found in seen.items() if wanted <= found}


def run_cell(
    cell: SweepCell,
    *,
    source: ModelParams,
    target: LabeledDataset,
    base: AdaptConfig,
    omegas: tuple[float, ...],
    class_averaged: bool = False,
) -> SweepCellResult:
    config = ablation_variant(
        base.model_copy(
            update={
                "eta": cell.eta,
                "rho": cell.rho,
                "seed": cell.seed,
                "variant": Variant.FULL,
                "use_global": True,
                "use_local": True,
            }
        ),
        cell.variant,
    )
    result = adapt(source, target.X, config)
    reports = tuple(
        evaluate_params(
            result.params, target.X, target.y, omega, class_averaged=class_averaged
        )
        for omega in omegas
    )
    return SweepCellResult(cell=cell, c_t_hat=result.c_t_hat, reports=reports)


def _results(
    cells: list[SweepCell], worker: partial[SweepCellResult], workers: int
) -> Iterator[SweepCellResult]:
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map() yields in submission order, so rows stay in grid order.
            yield from pool.map(worker, cells)
    else:
        yield from map(worker, cells)


def run_sweep(
    source: ModelParams,
    target: LabeledDataset,
    base: AdaptConfig,
    config: SweepConfig,
    metrics_path: Path,
    *,
    class_averaged: bool = False,
    resume: bool = False,
) -> list[SweepCellResult]:
    """Run every pending cell and append its rows as soon as it finishes."""
    grid = build_grid(config)
    done = completed_cells(metrics_path, config.omegas) if resume else set()
    pending = [cell for cell in grid if _cell_key(cell) not in done]
    if len(pending) < len(grid):
        logger.info(
            event_message(
                LogEvent.SWEEP_CELLS_SKIPPED,
                skipped=len(grid) - len(pending),
                path=metrics_path,
            )
        )

    worker = partial(
        run_cell,
        source=source,
        target=target,
        base=base,
        omegas=config.omegas,
        class_averaged=class_averaged,
    )
    metrics = get_app_metrics()
    finished: list[SweepCellResult] = []
    results = _results(pending, worker, config.workers)
    for cell in pending:
        try:
            result = next(results)
        except GLCError as exc:
            metrics.record_sweep_cell(outcome="failed")
            logger.error(
                event_message(
                    LogEvent.SWEEP_CELL_FAILED,
                    cell=cell.index,
                    seed=cell.seed,
                    variant=cell.variant.value,
                    eta=cell.eta,
                    rho=cell.rho,
                    error=type(exc).__name__,
                )
            )
            raise
        append_rows(metrics_path, SWEEP_COLUMNS, sweep_rows(result))
        metrics.record_sweep_cell(outcome="completed")
        logger.info(
            event_message(
                LogEvent.SWEEP_CELL_COMPLETED,
                cell=result.cell.index,
                total=len(grid),
                variant=result.cell.variant.value,
                eta=result.cell.eta,
                rho=result.cell.rho,
                c_t_hat=result.c_t_hat,
            )
        )
        finished.append(result)
    return finished
