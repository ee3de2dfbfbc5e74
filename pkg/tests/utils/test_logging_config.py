import logging
import sys

from dd_noise_spectroscopy.utils.logging_config import (
    log_uncaught,
    set_package_level,
    setup_logging,
)


def test_module_loggers_share_the_run_file():
    first = setup_logging("dd_noise_spectroscopy.tests.first")
    second = setup_logging("dd_noise_spectroscopy.tests.second")
    assert first.level == logging.WARNING
    assert len(first.handlers) == 2
    files = [
        h
        for h in first.handlers + second.handlers
        if isinstance(h, logging.FileHandler)
    ]
    assert len(files) == 2 and files[0] is files[1]
    assert sys.excepthook is log_uncaught


def test_handlers_are_attached_once():
    logger = setup_logging("dd_noise_spectroscopy.tests.once")
    again = setup_logging("dd_noise_spectroscopy.tests.once")
    assert again is logger
    assert len(logger.handlers) == 2


def test_set_package_level():
    logger = setup_logging("dd_noise_spectroscopy.tests.level")
    outsider = logging.getLogger("elsewhere.tests.level")
    outsider.setLevel(logging.ERROR)
    set_package_level(logging.INFO)
    try:
        assert logger.level == logging.INFO
        assert outsider.level == logging.ERROR
    finally:
        set_package_level(logging.WARNING)
