"""Pseudo-random quantum circuits, CUE diagnostics and motion-reversal noise simulation."""

__version__ = "0.1.0"
