"""Hyperbolic surface geometry toolkit for AdS volume bounds."""

__version__ = "0.1.0"
