import logging.handlers
import pathlib
import re
import sys

from colorama import Fore, Style, init as colorama_init

__all__ = ["MAX_OLD_LOGS", "ColourFormatter", "init_logging"]

MAX_OLD_LOGS = 8
LOG_FORMAT = "[{asctime}] [{levelname}] {name}: {message}"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_LEVEL_COLOURS = {
    logging.DEBUG: Style.DIM,
    logging.INFO: Fore.GREEN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}

_LATEST_RE = re.compile(r"latest(?P<suffix>\.log(?:\.\d+)?)$")
_PREVIOUS_RE = re.compile(r"previous\.log(?:\.\d+)?$")


class ColourFormatter(logging.Formatter):
    """Colours the level name of console records; file records stay plain."""

    def format(self, record: logging.LogRecord) -> str:
        colour = _LEVEL_COLOURS.get(record.levelno, "")
        plain = record.levelname
        record.levelname = f"{colour}{plain}{Style.RESET_ALL}"
        try:
            return super().format(record)
        finally:
            record.levelname = plain


def _rotate_latest(location: pathlib.Path) -> None:
    """Drop the old ``previous*`` logs and rename ``latest*`` to ``previous*``."""
    for path in location.iterdir():
        if _PREVIOUS_RE.match(path.name):
            path.unlink()
    for path in location.iterdir():
        match = _LATEST_RE.match(path.name)
        if match:
            path.replace(location / f"previous{match['suffix']}")


def init_logging(level: int, location: pathlib.Path) -> None:
    """Configure the ``syntaxdist`` logger for a command-line run.

    Records go to stdout and to two size-rotated files under ``location``:
    ``latest.log`` holds this run only (the last run's is kept as
    ``previous.log``) and ``syntaxdist.log`` accumulates every run.
    """
    colorama_init()
    base_logger = logging.getLogger("syntaxdist")
    base_logger.setLevel(level)
    for handler in list(base_logger.handlers):
        base_logger.removeHandler(handler)
        handler.close()

    stdout_handler = logging.StreamHandler(sys.stdout)
    stdout_handler.setFormatter(ColourFormatter(LOG_FORMAT, datefmt=DATE_FORMAT, style="{"))
    base_logger.addHandler(stdout_handler)

    location.mkdir(parents=True, exist_ok=True)
    _rotate_latest(location)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT, style="{")
    for stem in ("latest", "syntaxdist"):
        fhandler = logging.handlers.RotatingFileHandler(
            location / f"{stem}.log",
            maxBytes=1_000_000,  # About 1MB per logfile
            backupCount=MAX_OLD_LOGS,
            encoding="utf-8",
        )
        fhandler.setFormatter(formatter)
        base_logger.addHandler(fhandler)
