import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional

import orjson
import typer
from pydantic import BaseModel, ValidationError
from rich.console import Console

from app.core.exceptions import EXIT_USAGE, GammaClustException, cli_exception_handler
from app.schemas.run import RunConfig

logger = logging.getLogger(__name__)

# Human-facing output; stdout stays reserved for artifacts.
console = Console(stderr=True)


def make_config(**values: Any) -> RunConfig:
    """Builds a RunConfig from the given flags, leaving unset ones to the settings defaults."""
    try:
        return RunConfig(**{key: value for key, value in values.items() if value is not None})
    except ValidationError as e:
        message = "; ".join(error["msg"] for error in e.errors())
        logger.error(f"invalid arguments: {message}")
        console.print(f"[red]error:[/red] {message}")
        raise typer.Exit(code=EXIT_USAGE)


@contextmanager
def guarded() -> Iterator[None]:
    """Maps toolkit failures onto the process exit code."""
    try:
        yield
    except GammaClustException as exc:
        console.print(f"[red]error:[/red] {exc.detail}")
        raise typer.Exit(code=cli_exception_handler(exc))


def to_json(payload: Any) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    elif isinstance(payload, list):
        payload = [
            item.model_dump(mode="json") if isinstance(item, BaseModel) else item
            for item in payload
        ]
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode()


def emit(text: str, out: Optional[Path]) -> None:
    """Writes an artifact to `out`, or to stdout when no path is given."""
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        out.write_text(text)
    except OSError as e:
        console.print(f"[red]error:[/red] cannot write {out}: {e}")
        raise typer.Exit(code=EXIT_USAGE)
    logger.info(f"wrote {out}")
