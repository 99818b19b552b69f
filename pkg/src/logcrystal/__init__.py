"""Ordinary F-crystals with logarithmic poles over truncated p-adic power series."""

__version__ = "0.1.0"
