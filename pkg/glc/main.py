import argparse
from collections.abc import Sequence
import logging
from uuid import uuid4

from pydantic import ValidationError

from glc.cli.router import build_parser
from glc.core.config import settings
from glc.core.errors import GLCError, UsageError
from glc.core.logger import bind_run_context, configure_logging, event_message, reset_run_context
from glc.observability.events import LogEvent
from glc.observability.telemetry import start_span

logger = logging.getLogger(__name__)


def create_parser() -> argparse.ArgumentParser:
    return build_parser()


def _seed_of(args: argparse.Namespace) -> int | None:
    seed = getattr(args, "seed", None)
    return seed if isinstance(seed, int) else None


def main(argv: Sequence[str] | None = None) -> int:
    args = create_parser().parse_args(argv)
    configure_logging(args.log_level or settings.log_level)

    tokens = bind_run_context(uuid4().hex[:12], args.command, _seed_of(args))
    try:
        logger.info(event_message(LogEvent.COMMAND_STARTED, command=args.command))
        try:
            with start_span(f"glc.cli.{args.command}", {"command": args.command}):
                exit_code = args.handler(args)
        except ValidationError as exc:
            raise UsageError(str(exc)) from exc
        logger.info(
            event_message(LogEvent.COMMAND_COMPLETED, command=args.command, exit_code=exit_code)
        )
        return exit_code
    except GLCError as exc:
        logger.error(
            event_message(
                LogEvent.COMMAND_FAILED,
                command=args.command,
                error=type(exc).__name__,
                exit_code=exc.exit_code,
                detail=str(exc),
            )
        )
        return exc.exit_code
    finally:
        reset_run_context(tokens)


if __name__ == "__main__":
    raise SystemExit(main())
