"""Executable operational framework for uncertainty and complementarity."""

__version__ = "0.1.0"
