import argparse
from typing import Any

from rich.console import Console

from glc.cli.common import (
    add_config_flag,
    add_model_flag,
    add_path_flag,
    as_bool,
    build_model,
    optional_path,
    require_path,
    resolve_values,
)
from glc.core.numeric import DistanceMetric
from glc.infrastructure.checkpoints import load_checkpoint, save_checkpoint
from glc.infrastructure.datasets import load_csv
from glc.infrastructure.reports import write_history_csv
from glc.models.schemas import AdaptConfig, Variant
from glc.services.adaptation import adapt

console = Console()


def add_adapt_flags(parser: argparse.ArgumentParser) -> None:
    """Adaptation knobs shared with ``sweep`` (which overrides η, ρ and the seed)."""
    add_model_flag(parser, "--knn-k", AdaptConfig, "knn_k", "Neighbours |L|", type=int)
    add_model_flag(parser, "--epochs", AdaptConfig, "epochs", "Adaptation epochs", type=int)
    add_model_flag(parser, "--batch-size", AdaptConfig, "batch_size", "Batch size", type=int)
    add_model_flag(parser, "--lr", AdaptConfig, "lr", "Learning rate", type=float)
    add_model_flag(parser, "--momentum", AdaptConfig, "momentum", "SGD momentum", type=float)
    add_model_flag(
        parser,
        "--pseudo-refresh",
        AdaptConfig,
        "pseudo_refresh",
        "Re-label every N epochs",
        type=int,
    )
    add_model_flag(
        parser,
        "--class-count",
        AdaptConfig,
        "class_count",
        "Fixed C̃_t; skips silhouette estimation",
        type=int,
    )
    add_model_flag(
        parser,
        "--silhouette-metric",
        AdaptConfig,
        "silhouette_metric",
        "Distance for the silhouette",
        choices=[item.value for item in DistanceMetric],
    )
    add_model_flag(
        parser,
        "--normalize-for-clustering",
        AdaptConfig,
        "normalize_for_clustering",
        "L2-normalize features before clustering (true/false)",
    )
    add_model_flag(
        parser,
        "--kmeans-restarts",
        AdaptConfig,
        "kmeans_restarts",
        "k-means restarts per candidate",
        type=int,
    )
    add_model_flag(
        parser,
        "--kmeans-max-iters",
        AdaptConfig,
        "kmeans_max_iters",
        "Lloyd iterations cap",
        type=int,
    )


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "adapt",
        help="Adapt a source checkpoint to unlabeled target data.",
        description=(
            "Target labels in the CSV are read only to fill the history's "
            "evaluation columns."
        ),
    )
    add_config_flag(parser)
    add_path_flag(parser, "--checkpoint", "checkpoint", "Source checkpoint.")
    add_path_flag(parser, "--target", "target", "Target CSV.")
    add_path_flag(parser, "--out", "out", "Adapted checkpoint to write.")
    add_path_flag(parser, "--history", "history", "Per-epoch history CSV (optional).")
    add_model_flag(parser, "--eta", AdaptConfig, "eta", "Global loss weight η", type=float)
    add_model_flag(parser, "--rho", AdaptConfig, "rho", "Suppression floor ρ", type=float)
    add_model_flag(
        parser, "--omega", AdaptConfig, "omega", "Entropy threshold ω for history", type=float
    )
    add_model_flag(parser, "--seed", AdaptConfig, "seed", "Random seed", type=int)
    add_model_flag(
        parser,
        "--variant",
        AdaptConfig,
        "variant",
        "Ablation arm",
        choices=[item.value for item in Variant],
    )
    add_model_flag(
        parser,
        "--pseudo-dump-dir",
        AdaptConfig,
        "pseudo_dump_dir",
        "Write per-epoch pseudo-label CSVs here",
    )
    add_adapt_flags(parser)
    parser.add_argument(
        "--no-eval",
        dest="no_eval",
        action="store_true",
        default=argparse.SUPPRESS,
        help="Leave the history's evaluation columns empty.",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    values = resolve_values(
        args, [AdaptConfig], extra_keys=["checkpoint", "target", "out", "history", "no_eval"]
    )
    checkpoint = require_path(values, "checkpoint")
    target_path = require_path(values, "target")
    out_path = require_path(values, "out")
    history_path = optional_path(values, "history")
    config = build_model(AdaptConfig, values)

    source = load_checkpoint(checkpoint)
    target = load_csv(target_path)
    labels = None if as_bool(values.get("no_eval", False)) else target.y
    result = adapt(source, target.X, config, labels=labels)

    save_checkpoint(result.params, out_path)
    if history_path is not None:
        write_history_csv(result.history, history_path)
    console.print(
        f"adapted {len(result.history)} epoch(s), variant={result.variant.value}, "
        f"C̃_t={result.c_t_hat}, classifier unchanged={result.classifier_unchanged}"
    )
    return 0
