import sys
from contextlib import contextmanager
from typing import Any, Iterator, Optional

from tqdm import tqdm


class ProgressManager:
    """Progress bars for per-tau scans and Monte Carlo suites.

    Bars are hidden when stderr is not a terminal unless ``enabled`` says
    otherwise; ``--quiet`` sets ``enabled = False``.
    """

    def __init__(self, enabled: Optional[bool] = None) -> None:
        self.main_progress: Optional[tqdm] = None
        self.enabled = enabled

    @property
    def disabled(self) -> bool:
        if self.enabled is None:
            return not sys.stderr.isatty()
        return not self.enabled

    @contextmanager
    def main_bar(self, total: int, desc: str, **kwargs: Any) -> Iterator[tqdm]:
        """Bar advanced once per finished work item, closed on exit."""
        try:
            self.main_progress = tqdm(
                total=total, desc=desc, disable=self.disabled, **kwargs
            )
            yield self.main_progress
        finally:
            if self.main_progress:
                self.main_progress.close()
                self.main_progress = None


# Shared by the scan and the Monte Carlo suite
progress = ProgressManager()
