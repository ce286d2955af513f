"""Algorithmic complexity estimation for strings, grids and elementary cellular automata."""

__version__ = "0.1.0"
