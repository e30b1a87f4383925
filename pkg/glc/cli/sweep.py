import argparse
from typing import Any

from rich.console import Console

from glc.cli.adapt import add_adapt_flags
from glc.cli.common import (
    add_config_flag,
    add_model_flag,
    add_path_flag,
    as_bool,
    build_model,
    require_path,
    resolve_values,
)
from glc.core.config import settings
from glc.infrastructure.checkpoints import load_checkpoint
from glc.infrastructure.datasets import load_csv
from glc.models.schemas import AdaptConfig, SweepConfig
from glc.services.sweep import run_sweep

console = Console()


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "sweep",
        help="Grid over η, ρ, seeds and variants, scored at every ω.",
        description="Rows are appended and flushed as each cell finishes.",
    )
    add_config_flag(parser)
    add_path_flag(parser, "--checkpoint", "checkpoint", "Source checkpoint.")
    add_path_flag(parser, "--target", "target", "Labeled target CSV.")
    add_path_flag(parser, "--metrics", "metrics", "Sweep metrics CSV to append to.")
    add_model_flag(parser, "--etas", SweepConfig, "etas", "Comma-separated η values")
    add_model_flag(parser, "--rhos", SweepConfig, "rhos", "Comma-separated ρ values")
    add_model_flag(parser, "--omegas", SweepConfig, "omegas", "Comma-separated ω values")
    add_model_flag(parser, "--seeds", SweepConfig, "seeds", "Comma-separated seeds")
    add_model_flag(parser, "--variants", SweepConfig, "variants", "Comma-separated variants")
    parser.add_argument(
        "--workers",
        dest="workers",
        type=int,
        default=argparse.SUPPRESS,
        help="Worker processes (default: GLC_SWEEP_WORKERS or 1)",
    )
    parser.add_argument(
        "--resume",
        dest="resume",
        action="store_true",
        default=argparse.SUPPRESS,
        help="Skip cells whose rows are already in --metrics.",
    )
    parser.add_argument(
        "--class-averaged",
        dest="class_averaged",
        action="store_true",
        default=argparse.SUPPRESS,
        help="Average known accuracy over classes.",
    )
    add_adapt_flags(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    values = resolve_values(
        args,
        [SweepConfig, AdaptConfig],
        extra_keys=["checkpoint", "target", "metrics", "resume", "class_averaged"],
    )
    checkpoint = require_path(values, "checkpoint")
    target_path = require_path(values, "target")
    metrics_path = require_path(values, "metrics")
    values.setdefault("workers", settings.sweep_workers)
    sweep_config = build_model(SweepConfig, values)
    base = build_model(AdaptConfig, values)

    results = run_sweep(
        load_checkpoint(checkpoint),
        load_csv(target_path),
        base,
        sweep_config,
        metrics_path,
        class_averaged=as_bool(values.get("class_averaged", False)),
        resume=as_bool(values.get("resume", False)),
    )
    console.print(f"sweep finished: {len(results)} cell(s) written to {metrics_path}")
    return 0
