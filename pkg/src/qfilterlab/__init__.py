"""Finite-dimensional quantum filtering laboratory."""

__version__ = "0.1.0"
