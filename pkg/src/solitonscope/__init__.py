"""Numerical verification of conformal and Yamabe-type solitons on hypersurfaces."""

__version__ = "0.1.0"
