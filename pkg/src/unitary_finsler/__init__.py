"""Finsler geometry of finite-dimensional unitary groups and unitary orbits."""

__version__ = "0.3.0"
