from contextvars import ContextVar, Token
import logging

from opentelemetry.trace import get_current_span
from rich.logging import RichHandler

_run_id_ctx: ContextVar[str] = ContextVar("run_id", default="-")
_command_ctx: ContextVar[str] = ContextVar("command", default="-")
_seed_ctx: ContextVar[str] = ContextVar("seed", default="-")

_configured = False


class RunContextFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = _run_id_ctx.get()
        record.run_command = _command_ctx.get()
        record.run_seed = _seed_ctx.get()
        span = get_current_span()
        context = span.get_span_context() if span is not None else None
        if context and context.is_valid:
            record.trace_id = f"{context.trace_id:032x}"
        else:
            record.trace_id = "-"
        return True


def _build_rich_handler(level: str) -> RichHandler:
    return RichHandler(
        level=level,
        rich_tracebacks=True,
        log_time_format="[%X]",
        show_path=False,
        markup=False,
        omit_repeated_times=False,
    )


def configure_logging(level: str) -> None:
    global _configured
    if _configured:
        return

    normalized_level = level.upper().strip() or "INFO"
    handler = _build_rich_handler(normalized_level)
    handler.addFilter(RunContextFilter())
    logging.basicConfig(
        level=normalized_level,
        format=(
            "%(name)s | %(message)s | "
            "run=%(run_id)s cmd=%(run_command)s seed=%(run_seed)s "
            "trace_id=%(trace_id)s"
        ),
        datefmt="[%X]",
        handlers=[handler],
        force=True,
    )
    _configured = True


def bind_run_context(
    run_id: str,
    command: str,
    seed: int | None,
) -> tuple[Token[str], Token[str], Token[str]]:
    return (
        _run_id_ctx.set(run_id),
        _command_ctx.set(command),
        _seed_ctx.set("-" if seed is None else str(seed)),
    )


def reset_run_context(tokens: tuple[Token[str], Token[str], Token[str]]) -> None:
    run_token, command_token, seed_token = tokens
    _run_id_ctx.reset(run_token)
    _command_ctx.reset(command_token)
    _seed_ctx.reset(seed_token)


def get_run_id() -> str:
    return _run_id_ctx.get()


def event_message(event: str, **fields: object) -> str:
    parts = [f"event={event}"]
    for key, value in fields.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        parts.append(f"{key}={value}")
    return " ".join(parts)
