"""Dephasing-noise spectroscopy with multiple-pulse sequences."""

__version__ = "0.1.0"
