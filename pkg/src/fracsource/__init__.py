"""Forward and inverse source solvers for 1-D Caputo fractional diffusion."""

__version__ = "0.1.0"
