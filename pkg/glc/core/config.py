from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import TYPE_CHECKING, Any, cast

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from glc.core.errors import DataError, UsageError


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="GLC_",
        extra="ignore",
        populate_by_name=True,
    )

    log_level: str = "INFO"

    # Parallelism
    sweep_workers: int = Field(default=1, ge=1, le=64)
    estimate_workers: int = Field(default=1, ge=1, le=64)


def load_config_file(path: Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    if not path.exists():
        raise DataError(f"Config file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"Failed to read config file {path}: {exc}") from exc

    values: dict[str, str] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise UsageError(
                f"{path}:{line_number}: expected 'key = value', got {raw.strip()!r}"
            )
        if key in values:
            raise UsageError(f"{path}:{line_number}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def dump_config(values: Mapping[str, object]) -> str:
    """Render a mapping back to the flat format, one key per line."""
    lines = [f"{key} = {_render_value(value)}" for key, value in values.items()]
    return "\n".join(lines) + "\n"


def _render_value(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def merge_sources(
    file_values: Mapping[str, str],
    flag_values: Mapping[str, Any],
    models: Iterable[type[BaseModel]],
    *,
    extra_keys: Iterable[str] = (),
) -> dict[str, Any]:
    """Overlay flags on config-file values; reject keys no model declares."""
    allowed = set(extra_keys)
    for model in models:
        allowed.update(model.model_fields)
    unknown = sorted(set(file_values) - allowed)
    if unknown:
        raise UsageError(f"Unknown config key(s): {', '.join(unknown)}")
    merged: dict[str, Any] = {
        key: value for key, value in file_values.items() if value != ""
    }
    merged.update(flag_values)
    return merged


def pick_fields(values: Mapping[str, Any], model: type[BaseModel]) -> dict[str, Any]:
    return {key: value for key, value in values.items() if key in model.model_fields}


def split_csv(value: str) -> tuple[str, ...]:
    """Split a comma-separated string, stripping whitespace and dropping empties."""
    return tuple(item.strip() for item in value.split(",") if item.strip())


if TYPE_CHECKING:
    settings = cast(Settings, object())
else:
    settings = Settings()
