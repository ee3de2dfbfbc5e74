import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from types import TracebackType
from typing import Optional, Type

PACKAGE_LOGGER = "dd_noise_spectroscopy"

_file_handler: Optional[logging.FileHandler] = None


def log_uncaught(
    exc_type: Type[BaseException],
    exc_value: BaseException,
    exc_traceback: Optional[TracebackType],
) -> None:
    """Route uncaught exceptions into the package log; Ctrl-C stays quiet."""
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return
    setup_logging(PACKAGE_LOGGER).critical(
        "Run aborted by an uncaught exception",
        exc_info=(exc_type, exc_value, exc_traceback),
    )


def _log_dir() -> Path:
    override = os.environ.get("DD_NOISE_LOG_DIR")
    if override:
        return Path(override)
    return Path(__file__).parent.parent.parent / "logs"


def _shared_file_handler(formatter: logging.Formatter) -> logging.FileHandler:
    # One log file per process, shared by every module logger
    global _file_handler
    if _file_handler is None:
        log_dir = _log_dir()
        log_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        _file_handler = logging.FileHandler(log_dir / f"noisespec_{timestamp}.log")
        _file_handler.setFormatter(formatter)
    return _file_handler


def setup_logging(module_name: str, log_level: Optional[int] = None) -> logging.Logger:
    """Logger for one module of the workbench.

    Records go to stderr and to the run's timestamped log file, which lives in
    ``logs/`` at the project root unless ``DD_NOISE_LOG_DIR`` names another
    directory. Results never pass through here, so reruns stay byte-identical
    whatever the log level.

    Args:
        module_name: Usually ``__name__``; ``set_package_level`` finds the
            logger through this prefix.
        log_level: Level of the logger, WARNING when omitted.

    Returns:
        logging.Logger: The module logger; repeated calls reuse its handlers.

    Raises:
        OSError: If the log directory or file cannot be created.
    """
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )

    logger = logging.getLogger(module_name)
    logger.setLevel(log_level or logging.WARNING)

    if not logger.handlers:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(_shared_file_handler(formatter))
        logger.addHandler(console_handler)
        logger.propagate = False

    sys.excepthook = log_uncaught

    return logger


def set_package_level(log_level: int) -> None:
    """Apply a log level to every logger already created by this package."""
    for name, candidate in logging.Logger.manager.loggerDict.items():
        if name.startswith(PACKAGE_LOGGER) and isinstance(candidate, logging.Logger):
            candidate.setLevel(log_level)
