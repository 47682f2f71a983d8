"""Numerical workbench for gluing formulas of zeta-regularized determinants."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
