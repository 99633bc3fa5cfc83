"""Numerical laboratory for coercive inequalities of measures e^{-U} dx."""

__version__ = "0.1.0"
