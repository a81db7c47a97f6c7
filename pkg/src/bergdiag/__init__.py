"""Diagonal derivative norms for Bergman-space functions on a sector."""

__version__ = "0.1.0"
