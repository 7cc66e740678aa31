"""Simulation and verification tools for supremum-penalized Brownian motion."""

__version__ = "0.1.0"
