import logging
import sys
from typing import Optional, Sequence

from ..coherence import QuadratureError
from ..estimation import SpectrumFitError, T2FitRejected
from ..utils.config_manager import RunConfig
from ..utils.logging_config import set_package_level, setup_logging
from ..utils.progress import progress
from .commands import COMMAND_HANDLERS, EXIT_FIT_FAILURE, EXIT_VALIDATION
from .parser import Parser

logger = setup_logging(__name__)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one workbench subcommand and return its exit code.

    Exit codes: 0 success, 2 invalid input (bad config, empty grid, tau
    outside the frequency bounds, non-converging quadrature), 3 partial scan,
    4 spectrum or T2 fit failure, 5 Monte Carlo verdict FAIL.
    """
    args = Parser().parse_args(argv)
    if args.verbose:
        set_package_level(logging.INFO)
    if args.quiet:
        progress.enabled = False

    try:
        config = RunConfig.load(args.config, args.overrides()).validate()
        logger.info(
            f"{args.command}: config {config.config_hash}, seed {config.seed}, "
            f"output in {config.output_dir}"
        )
        return COMMAND_HANDLERS[args.command](config)
    except SpectrumFitError as e:
        logger.error(f"Spectrum fit failed: {e}")
        return EXIT_FIT_FAILURE
    except T2FitRejected as e:
        logger.error(f"T2 fit rejected: {e}")
        return EXIT_FIT_FAILURE
    except QuadratureError as e:
        logger.error(f"Quadrature did not converge: {e}")
        return EXIT_VALIDATION
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
