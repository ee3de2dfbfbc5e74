import os
import tempfile

import pytest


def pytest_addoption(parser):
    """Add command-line options to pytest."""
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="run statistical and long-running checks",
    )


def pytest_configure(config):
    """Configure pytest with custom marks and keep log files out of the tree."""
    config.addinivalue_line(
        "markers",
        "slow: mark test as a statistical or long-running check",
    )
    os.environ.setdefault(
        "DD_NOISE_LOG_DIR", os.path.join(tempfile.gettempdir(), "dd_noise_test_logs")
    )


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless --run-slow is specified."""
    if not config.getoption("--run-slow"):
        skip_slow = pytest.mark.skip(reason="need --run-slow option to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


@pytest.fixture
def white():
    """White spectrum with S0 = 0.4."""
    from dd_noise_spectroscopy.spectra import White

    return White(0.4)


@pytest.fixture
def lorentzian():
    """Lorentzian spectrum with sigma2 = tau_c = 1."""
    from dd_noise_spectroscopy.spectra import Lorentzian

    return Lorentzian(sigma2=1.0, tau_c=1.0)
