"""Logger factory: stdlib logging routed through a rich handler on stderr."""

from __future__ import annotations

import logging
import os

from rich.console import Console
from rich.logging import RichHandler

_ROOT = "flrw_boltzmann"
_configured = False


def _configure() -> None:
    global _configured
    if _configured:
        return
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root = logging.getLogger(_ROOT)
    root.addHandler(handler)
    level = os.environ.get("FLRWB_LOG_LEVEL", "WARNING").upper()
    root.setLevel(level if level in logging.getLevelNamesMapping() else logging.WARNING)
    root.propagate = False
    _configured = True


def get_logger(name: str) -> logging.Logger:
    """Return a package logger (``name`` is usually ``__name__``)."""
    _configure()
    if not name.startswith(_ROOT):
        name = f"{_ROOT}.{name}"
    return logging.getLogger(name)


def set_verbosity(level: int) -> None:
    """Map a CLI ``-v`` count onto the package log level."""
    _configure()
    root = logging.getLogger(_ROOT)
    if level >= 2:
        root.setLevel(logging.DEBUG)
    elif level == 1:
        root.setLevel(logging.INFO)
