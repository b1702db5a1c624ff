"""Utility Module.

This module provides the shared logger of the HiCache package, feature-vector coercion and
the atomic file writes used by the trace writer and the CLI outputs.
"""

import contextlib
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Union

import numpy as np
from colorama import Fore, Style, init

from hicache.errors import InvalidFeatureError

init(autoreset=True)

LOGGER_NAME: str = "HiCache"


class CustomFormatter(logging.Formatter):
    """Log formatter with three-letter level names, colored on the console."""

    LEVELS = {
        logging.DEBUG: ("DBG", Fore.WHITE),
        logging.INFO: ("INF", Fore.CYAN),
        logging.WARNING: ("WAR", Fore.YELLOW),
        logging.ERROR: ("ERR", Fore.RED),
        logging.CRITICAL: ("CRT", Fore.LIGHTRED_EX),
    }

    def __init__(self, use_colors: bool = True):
        """
        Args:
            use_colors (bool): Wrap the level and the message in ANSI colors.
        """
        super().__init__(
            "{asctime} {level_abbr} [{name}] {message} ({module}:{lineno})",
            style="{",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        self.use_colors = use_colors

    def format(self, record: logging.LogRecord) -> str:
        abbr, color = self.LEVELS.get(record.levelno, (record.levelname[:3], ""))
        # copy so that other handlers see the plain record
        styled = logging.makeLogRecord(record.__dict__)
        styled.msg, styled.args = record.getMessage(), None
        if self.use_colors and color:
            styled.level_abbr = f"{color}{abbr}{Style.RESET_ALL}"
            styled.msg = f"{color}{styled.msg}{Style.RESET_ALL}"
        else:
            styled.level_abbr = abbr
        return super().format(styled)


class LoggerManager:
    """Manages the package logger: a colored stderr handler and an optional log file."""

    def __init__(self, log_file: Optional[str] = None):
        """
        Args:
            log_file (Optional[str]): Attach a plain-text file handler at this path.
        """
        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False

        self.console_handler = self._create_console_handler()
        self.logger.addHandler(self.console_handler)

        self.file_handler: Optional[logging.Handler] = None
        if log_file:
            self.update_log_file(log_file)

    @staticmethod
    def _create_console_handler() -> logging.Handler:
        """Creates a stderr handler with colored output.

        Stdout is left to the CLI for machine-readable results.
        """
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(CustomFormatter(use_colors=True))
        return console_handler

    @staticmethod
    def _create_file_handler(log_file: str) -> logging.Handler:
        """Creates a file handler without colored output."""
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(CustomFormatter(use_colors=False))
        return file_handler

    def update_log_file(self, new_log_file: str) -> None:
        """Replaces the file handler; the previous log file is closed."""
        if self.file_handler is not None:
            self.logger.removeHandler(self.file_handler)
            self.file_handler.close()

        self.file_handler = self._create_file_handler(new_log_file)
        self.logger.addHandler(self.file_handler)

        self.logger.debug(f"Logging to {new_log_file}")

    def set_console_level(self, level: int) -> None:
        """Sets the level of the console handler (e.g. ``logging.DEBUG`` for ``--verbose``)."""
        self.console_handler.setLevel(level)


_LOGGER_MANAGER = LoggerManager()


def get_logger() -> logging.Logger:
    """Returns the package logger."""
    return _LOGGER_MANAGER.logger


def update_log_file(new_log_file: str) -> None:
    """Points the shared logger at a new log file."""
    _LOGGER_MANAGER.update_log_file(new_log_file)


def set_verbose(verbose: bool) -> None:
    """Switch the console between INFO and DEBUG output."""
    _LOGGER_MANAGER.set_console_level(logging.DEBUG if verbose else logging.INFO)


def as_feature(values, name: str = "feature") -> np.ndarray:
    """Converts ``values`` to a 1-D float64 feature vector.

    Args:
        values: Anything ``numpy.asarray`` accepts.
        name (str): Used in error messages.

    Returns:
        np.ndarray: A contiguous float64 vector with at least one entry.

    Raises:
        InvalidFeatureError: If the input is not one-dimensional or is empty.
    """
    vector = np.ascontiguousarray(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise InvalidFeatureError(
            f"{name} must be a non-empty 1-D vector, got shape {vector.shape}"
        )
    return vector


def atomic_write_bytes(path: Union[str, Path], data: bytes) -> Path:
    """Writes ``data`` to ``path`` through a temporary file and an atomic rename.

    A failed write never leaves a partial file at ``path``.

    Args:
        path (str | Path): Destination file.
        data (bytes): Full file content.

    Returns:
        Path: The destination path.
    """
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "wb") as tmp_file:
            tmp_file.write(data)
            tmp_file.flush()
            os.fsync(tmp_file.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_name)
        raise
    return path


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """UTF-8 text variant of ``atomic_write_bytes``."""
    return atomic_write_bytes(path, text.encode("utf-8"))


def format_float(value: float) -> str:
    """Shortest decimal string that round-trips to the same float64."""
    return repr(float(value))
