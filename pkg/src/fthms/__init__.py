"""Frequency-time hybrid multiple-scattering solver for the 2D wave equation."""

__version__ = "0.1.0"
