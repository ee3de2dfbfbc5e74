import argparse
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

COMMANDS = ("filter", "coherence", "mc-validate", "t2scan", "reconstruct", "bounds")


@dataclass
class Args:
    """Command line arguments."""

    command: str
    config: Optional[Path]
    seed: Optional[int]
    out: Optional[Path]
    force: bool
    harmonics: Optional[int]
    max_workers: Optional[int]
    verbose: bool
    quiet: bool
    scan: Optional[Path] = None
    model: Optional[str] = None

    def overrides(self) -> Dict[str, Any]:
        """Config fields set on the command line; flags win over the file."""
        values: Dict[str, Any] = {
            "seed": self.seed,
            "output_dir": str(self.out) if self.out is not None else None,
            "harmonics": self.harmonics,
            "max_workers": self.max_workers,
            "scan": str(self.scan) if self.scan is not None else None,
            "model": self.model,
        }
        if self.force:
            values["force"] = True
        return {k: v for k, v in values.items() if v is not None}


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(
            f"seed must be an unsigned 64-bit value: {text}"
        )
    return value


class Parser:
    """Command line argument parser for the noise spectroscopy workbench."""

    def __init__(self, description: str = "Noise spectroscopy workbench") -> None:
        """Initialize the parser with the shared flags and one subcommand per step.

        Args:
            description: Description for the argument parser
        """
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument(
            "--config",
            type=Path,
            help="Path to run config JSON file",
            default=None,
        )
        common.add_argument("--seed", type=_seed, help="Root random seed", default=None)
        common.add_argument("--out", type=Path, help="Output directory", default=None)
        common.add_argument(
            "--force",
            action="store_true",
            help="Scan taus outside the frequency bounds",
        )
        common.add_argument(
            "--harmonics", type=int, help="Harmonic cutoff L", default=None
        )
        common.add_argument(
            "--max-workers",
            type=int,
            help="Maximum number of concurrent workers",
            default=None,
        )
        verbosity = common.add_mutually_exclusive_group()
        verbosity.add_argument("--verbose", action="store_true", help="Log progress")
        verbosity.add_argument("--quiet", action="store_true", help="No progress bars")

        self.parser = argparse.ArgumentParser(description=description)
        sub = self.parser.add_subparsers(dest="command", required=True)
        sub.add_parser(
            "filter", parents=[common], help="Filter function on an omega grid"
        )
        sub.add_parser(
            "coherence", parents=[common], help="Coherence curve W(t) of a family"
        )
        sub.add_parser(
            "mc-validate",
            parents=[common],
            help="Monte Carlo OU check of the coherence integral",
        )
        sub.add_parser("t2scan", parents=[common], help="T2L scan over a tau grid")
        reconstruct = sub.add_parser(
            "reconstruct", parents=[common], help="Spectrum from a T2L scan"
        )
        reconstruct.add_argument("--scan", type=Path, help="Scan CSV", default=None)
        reconstruct.add_argument(
            "--model", type=str, help="Spectrum family to fit", default=None
        )
        sub.add_parser("bounds", parents=[common], help="Measurable frequency window")

    def parse_args(self, argv: Optional[Sequence[str]] = None) -> Args:
        """Parse and return the command line arguments.

        Returns:
            Args: Parsed command line arguments.
        """
        return Args(**vars(self.parser.parse_args(argv)))
