"""Flag plumbing shared by every subcommand.

Flags default to ``argparse.SUPPRESS`` so that only what the user typed reaches
the merge; model defaults are shown in ``--help`` and applied by pydantic.
"""

import argparse
from collections.abc import Callable, Iterable, Mapping
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from glc.core.config import load_config_file, merge_sources, pick_fields
from glc.core.errors import UsageError

ModelT = TypeVar("ModelT", bound=BaseModel)
Handler = Callable[[argparse.Namespace], int]


def _default_text(model: type[BaseModel], field: str) -> str:
    default = model.model_fields[field].default
    if isinstance(default, tuple):
        return ",".join(str(getattr(item, "value", item)) for item in default)
    if default is None:
        return "unset"
    return str(getattr(default, "value", default))


def add_model_flag(
    parser: argparse.ArgumentParser,
    flag: str,
    model: type[BaseModel],
    field: str,
    help_text: str,
    **kwargs: Any,
) -> None:
    parser.add_argument(
        flag,
        dest=field,
        default=argparse.SUPPRESS,
        help=f"{help_text} (default: {_default_text(model, field)})",
        **kwargs,
    )


def add_path_flag(
    parser: argparse.ArgumentParser, flag: str, dest: str, help_text: str
) -> None:
    parser.add_argument(
        flag, dest=dest, type=Path, default=argparse.SUPPRESS, metavar="PATH", help=help_text
    )


def add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        metavar="FILE",
        help="Flat 'key = value' file; flags given on the command line win.",
    )


def resolve_values(
    args: argparse.Namespace,
    models: Iterable[type[BaseModel]],
    extra_keys: Iterable[str] = (),
) -> dict[str, Any]:
    """Merge the optional config file with the flags the user passed."""
    models = tuple(models)
    extra = tuple(extra_keys)
    flags = {
        key: value
        for key, value in vars(args).items()
        if key not in {"config", "command", "handler", "log_level"}
    }
    file_values = load_config_file(args.config) if args.config is not None else {}
    return merge_sources(file_values, flags, models, extra_keys=extra)


def build_model(model: type[ModelT], values: Mapping[str, Any]) -> ModelT:
    try:
        return model.model_validate(pick_fields(values, model))
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or model.__name__}: {error['msg']}"
            for error in exc.errors()
        )
        raise UsageError(f"Invalid {model.__name__}: {problems}") from exc


def require_path(values: Mapping[str, Any], key: str) -> Path:
    value = values.get(key)
    if value in (None, ""):
        raise UsageError(f"Missing required option --{key.replace('_', '-')}.")
    return Path(value)


def optional_path(values: Mapping[str, Any], key: str) -> Path | None:
    value = values.get(key)
    return None if value in (None, "") else Path(value)


def as_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in {"1", "true", "yes", "on"}:
        return True
    if text in {"0", "false", "no", "off", ""}:
        return False
    raise UsageError(f"Expected a boolean, got {value!r}.")
