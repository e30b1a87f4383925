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
from glc.core.config import dump_config
from glc.core.errors import DataError
from glc.infrastructure.datasets import save_csv
from glc.models.schemas import Scenario, ScenarioSpec
from glc.services.scenarios import generate_scenario

SOURCE_FILE = "source.csv"
TARGET_FILE = "target.csv"
SCENARIO_FILE = "scenario.txt"


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "generate",
        help="Write a synthetic source/target scenario.",
        description="Generate source.csv, target.csv and scenario.txt into --out.",
    )
    add_config_flag(parser)
    add_model_flag(
        parser,
        "--scenario",
        ScenarioSpec,
        "scenario",
        "Category shift",
        choices=[item.value for item in Scenario],
    )
    add_model_flag(parser, "--shared", ScenarioSpec, "shared", "Shared classes", type=int)
    add_model_flag(
        parser,
        "--src-private",
        ScenarioSpec,
        "source_private",
        "Source-private classes; unset takes the scenario split",
        type=int,
    )
    add_model_flag(
        parser,
        "--tgt-private",
        ScenarioSpec,
        "target_private",
        "Target-private classes; unset takes the scenario split",
        type=int,
    )
    add_model_flag(parser, "--input-dim", ScenarioSpec, "input_dim", "Feature count", type=int)
    add_model_flag(
        parser,
        "--source-per-class",
        ScenarioSpec,
        "source_per_class",
        "Source samples per class",
        type=int,
    )
    add_model_flag(
        parser,
        "--target-per-class",
        ScenarioSpec,
        "target_per_class",
        "Target samples per class",
        type=int,
    )
    add_model_flag(
        parser, "--rotation-deg", ScenarioSpec, "rotation_deg", "Domain rotation", type=float
    )
    add_model_flag(
        parser,
        "--translation-scale",
        ScenarioSpec,
        "translation_scale",
        "Translation as a multiple of the mean class-mean norm",
        type=float,
    )
    add_model_flag(parser, "--noise-std", ScenarioSpec, "noise_std", "Noise std", type=float)
    add_model_flag(
        parser,
        "--target-noise-scale",
        ScenarioSpec,
        "target_noise_scale",
        "Target noise std relative to source",
        type=float,
    )
    add_model_flag(
        parser,
        "--separation",
        ScenarioSpec,
        "separation",
        "Minimum class-mean distance in noise stds",
        type=float,
    )
    add_model_flag(parser, "--seed", ScenarioSpec, "seed", "Random seed", type=int)
    add_path_flag(parser, "--out", "out", "Output directory.")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    values = resolve_values(args, [ScenarioSpec], extra_keys=["out"])
    out_dir = require_path(values, "out")
    spec = build_model(ScenarioSpec, values)
    source, target = generate_scenario(spec)
    save_csv(source, out_dir / SOURCE_FILE)
    save_csv(target, out_dir / TARGET_FILE)
    try:
        (out_dir / SCENARIO_FILE).write_text(
            dump_config(spec.model_dump(mode="json")), encoding="utf-8"
        )
    except OSError as exc:
        raise DataError(f"Failed to write {out_dir / SCENARIO_FILE}: {exc}") from exc
    return 0
