"""Numerical laboratory for reproducing formulae of triangular symplectic subgroups."""

__version__ = "0.1.0"
