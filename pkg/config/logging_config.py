"""
Logging configuration for cantor-index.
"""
import logging
import sys
from pathlib import Path
from typing import Optional, TextIO, Union

from .settings import settings

# Define log format
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(
    log_level: Union[int, str, None] = None,
    log_dir: Optional[str] = None,
    stream: Optional[TextIO] = None,
):
    """
    Set up logging configuration for the application.

    Logs go to the console stream and to <log_dir>/cantor_index.log.
    Reports never contain log output.

    Args:
        log_level: Logging level (default: settings.LOG_LEVEL)
        log_dir: Directory for the log file (default: settings.LOG_DIR)
        stream: Console stream (default: sys.stdout)

    Returns:
        The configured root logger
    """
    if log_level is None:
        log_level = settings.LOG_LEVEL
    if isinstance(log_level, str):
        log_level = getattr(logging, log_level.upper(), logging.INFO)

    directory = Path(log_dir or settings.LOG_DIR)
    directory.mkdir(parents=True, exist_ok=True)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    console_handler = logging.StreamHandler(stream or sys.stdout)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)

    file_handler = logging.FileHandler(directory / "cantor_index.log")
    file_handler.setLevel(log_level)
    file_handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    # Repeated CLI invocations in one process must not stack handlers
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
    root_logger.addHandler(console_handler)
    root_logger.addHandler(file_handler)

    return root_logger


def get_logger(name):
    """
    Get a logger instance for a specific module.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)
