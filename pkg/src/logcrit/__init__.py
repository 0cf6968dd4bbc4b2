"""Radial variational solvers for a coupled critical system with logarithmic terms on 4-balls."""
from .errors import DomainError, NumericError, PreconditionError
from .kernels import BACKEND
from .params import ParameterSet, ball_geometry, classify, sobolev_constant
from .radial import RadialField, RadialGrid, make_grid
from .functionals import StatePair, energy_L, grad_L

__version__ = "0.1.0"

__all__ = ["BACKEND", "DomainError", "NumericError", "ParameterSet", "PreconditionError",
           "RadialField", "RadialGrid", "StatePair", "ball_geometry", "classify",
           "energy_L", "grad_L", "make_grid", "sobolev_constant"]
