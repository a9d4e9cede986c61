"""Continuous-time quantum-walk search on truncated simplex lattices."""

__version__ = "0.1.0"
