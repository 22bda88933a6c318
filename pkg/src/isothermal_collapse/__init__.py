"""Converging-diverging similarity solutions of the radial isothermal Euler system."""

__version__ = "0.1.0"
