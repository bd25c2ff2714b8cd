from __future__ import annotations

import logging
import os
from pathlib import Path

from rich.console import Console
from rich.text import Text

LOG_ENV_VAR = "BUBBLE_LOG"
_FILE_LEVEL = logging.DEBUG
_FILE_FORMAT = "%(asctime)s [%(name)s] %(levelname)s %(message)s"


def stream_level() -> int:
    """Console verbosity from $BUBBLE_LOG (read when a handler is created, so `.env` files apply)."""
    return getattr(logging, os.getenv(LOG_ENV_VAR, "INFO").upper(), logging.INFO)


class RichFormatter(logging.Formatter):
    """Colorized single-record formatter; continuation lines are indented under the prefix."""

    level_colors = {
        logging.DEBUG: "dim cyan",
        logging.INFO: "green",
        logging.WARNING: "yellow",
        logging.ERROR: "red",
        logging.CRITICAL: "bold red",
    }

    def __init__(self, console: Console | None = None, emoji: str = ""):
        super().__init__()
        self.console = console or Console(stderr=True)
        self.emoji = emoji + " " if emoji and not emoji.endswith(" ") else emoji

    def format(self, record: logging.LogRecord) -> str:
        level_name = record.levelname.replace("WARNING", "WARN")
        indent = " " * len(f"{self.emoji}{level_name} [{record.name}] ")

        text = Text()
        text.append(self.emoji, style="white")
        text.append(f"{level_name} ", style=self.level_colors.get(record.levelno, "white"))
        text.append(f"[{record.name}] ", style="dim")

        first, *rest = record.getMessage().split("\n")
        text.append(first, style="white")
        continuation = [(line, "white") for line in rest]
        if record.exc_info:
            continuation += [(line, "red") for line in self.formatException(record.exc_info).split("\n")]
        for line, style in continuation:
            text.append("\n" + indent, style="dim")
            text.append(line, style=style)

        with self.console.capture() as capture:
            self.console.print(text, soft_wrap=True)
        return capture.get().rstrip()


def add_file_handler(logger: logging.Logger, log_path: Path) -> logging.FileHandler:
    """Attach a DEBUG-level plain-text file handler and return it for later removal."""
    log_path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(log_path)
    handler.setLevel(_FILE_LEVEL)
    handler.setFormatter(logging.Formatter(fmt=_FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    logger.addHandler(handler)
    return handler


def add_root_file_handler(log_path: Path) -> logging.FileHandler:
    """Capture every bubbleflow record (all module loggers propagate to the root)."""
    return add_file_handler(logging.getLogger(), log_path)


def remove_file_handler(logger: logging.Logger, handler: logging.FileHandler) -> None:
    if handler in logger.handlers:
        logger.removeHandler(handler)
    handler.close()


def cleanup_file_handlers(logger: logging.Logger) -> None:
    """Close every file handler of `logger` (avoids descriptor leaks across CLI invocations)."""
    for handler in logger.handlers[:]:
        if isinstance(handler, logging.FileHandler):
            remove_file_handler(logger, handler)


def get_logger(name: str, *, emoji: str = "", log_path: Path | None = None) -> logging.Logger:
    """Get logger. Use this instead of `logging.getLogger` so that the console
    handler and level follow $BUBBLE_LOG.
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(RichFormatter(emoji=emoji))
        handler.setLevel(stream_level())
        # Level filtering happens on the handlers
        logger.setLevel(1)
        logger.addHandler(handler)
        logger.propagate = True
    if log_path is not None:
        add_file_handler(logger, log_path)
    return logger
