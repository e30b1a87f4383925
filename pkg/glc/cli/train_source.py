import argparse
from typing import Any

from glc.cli.common import (
    add_config_flag,
    add_model_flag,
    add_path_flag,
    build_model,
    require_path,
    resolve_values,
)
from glc.core.errors import UsageError
from glc.infrastructure.checkpoints import save_checkpoint
from glc.infrastructure.datasets import load_csv
from glc.models.schemas import SourceConfig
from glc.services.adaptation import train_source


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "train-source",
        help="Train the source model on labeled source data.",
        description="Label-smoothed cross-entropy with SGD and momentum.",
    )
    add_config_flag(parser)
    add_path_flag(parser, "--data", "data", "Labeled source CSV.")
    add_path_flag(parser, "--out", "out", "Checkpoint to write.")
    parser.add_argument(
        "--num-classes",
        dest="num_classes",
        type=int,
        default=argparse.SUPPRESS,
        help="Classifier width C_s (default: max label + 1)",
    )
    add_model_flag(parser, "--hidden-dim", SourceConfig, "hidden_dim", "Hidden width", type=int)
    add_model_flag(
        parser, "--feature-dim", SourceConfig, "feature_dim", "Feature width", type=int
    )
    add_model_flag(parser, "--epochs", SourceConfig, "epochs", "Training epochs", type=int)
    add_model_flag(parser, "--batch-size", SourceConfig, "batch_size", "Batch size", type=int)
    add_model_flag(parser, "--lr", SourceConfig, "lr", "Learning rate", type=float)
    add_model_flag(parser, "--momentum", SourceConfig, "momentum", "SGD momentum", type=float)
    add_model_flag(parser, "--alpha", SourceConfig, "alpha", "Label smoothing", type=float)
    add_model_flag(parser, "--seed", SourceConfig, "seed", "Random seed", type=int)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    values = resolve_values(args, [SourceConfig], extra_keys=["data", "out", "num_classes"])
    data_path = require_path(values, "data")
    out_path = require_path(values, "out")
    config = build_model(SourceConfig, values)
    num_classes = values.get("num_classes")
    try:
        width = int(num_classes) if num_classes not in (None, "") else None
    except ValueError as exc:
        raise UsageError(f"num_classes must be an integer, got {num_classes!r}.") from exc

    params = train_source(load_csv(data_path), config, num_classes=width)
    save_checkpoint(params, out_path)
    return 0
