import argparse
from typing import Any

from rich.console import Console
from rich.table import Table

from glc.cli.common import (
    add_config_flag,
    add_model_flag,
    add_path_flag,
    build_model,
    optional_path,
    require_path,
    resolve_values,
)
from glc.infrastructure.checkpoints import load_checkpoint
from glc.infrastructure.datasets import load_csv
from glc.infrastructure.reports import METRICS_COLUMNS, append_rows, metrics_row
from glc.models.schemas import EvalConfig, EvalProtocol
from glc.services.evaluation import evaluate_params
from glc.services.types import EvaluationReport

console = Console()


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "eval",
        help="Score a checkpoint on labeled data.",
        description="H-score for open scenarios, overall accuracy for closed ones.",
    )
    add_config_flag(parser)
    add_path_flag(parser, "--checkpoint", "checkpoint", "Checkpoint to evaluate.")
    add_path_flag(parser, "--data", "data", "Labeled CSV.")
    add_path_flag(parser, "--metrics", "metrics", "Metrics CSV to append to (optional).")
    add_model_flag(parser, "--omega", EvalConfig, "omega", "Entropy threshold ω", type=float)
    add_model_flag(
        parser,
        "--protocol",
        EvalConfig,
        "protocol",
        "Force a protocol; unset infers it from the labels",
        choices=[item.value for item in EvalProtocol],
    )
    add_model_flag(
        parser,
        "--class-averaged",
        EvalConfig,
        "class_averaged",
        "Average known accuracy over classes",
        action="store_true",
    )
    parser.set_defaults(handler=run)


def _render(report: EvaluationReport) -> Table:
    table = Table(title=f"{report.protocol.value} @ ω={report.omega}")
    table.add_column("metric")
    table.add_column("value", justify="right")
    rows = {
        "h_score": report.h_score,
        "acc_known": report.acc_known,
        "acc_unknown": report.acc_unknown,
        "accuracy": report.accuracy,
        "unknown_rate": report.unknown_rate,
    }
    for name, value in rows.items():
        table.add_row(name, "-" if value is None else f"{value:.4f}")
    return table


def run(args: argparse.Namespace) -> int:
    values = resolve_values(args, [EvalConfig], extra_keys=["checkpoint", "data", "metrics"])
    checkpoint = require_path(values, "checkpoint")
    data_path = require_path(values, "data")
    metrics_path = optional_path(values, "metrics")
    config = build_model(EvalConfig, values)

    params = load_checkpoint(checkpoint)
    data = load_csv(data_path)
    report = evaluate_params(
        params,
        data.X,
        data.y,
        config.omega,
        protocol=config.protocol,
        class_averaged=config.class_averaged,
    )
    console.print(_render(report))
    if metrics_path is not None:
        append_rows(metrics_path, METRICS_COLUMNS, [metrics_row(checkpoint, data_path, report)])
    return 0
