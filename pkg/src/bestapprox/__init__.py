"""Exact-arithmetic toolkit for multi-dimensional best Diophantine approximations."""

__version__ = "0.1.0"
