"""Numerical laboratory for the limiting model flow of renormalized volume."""

__version__ = "0.1.0"
