"""Globally optimal trajectories on curves, rotation groups and the
hyperbolic plane, with lifting of optimal solutions to coupled problems and
a perturbation harness for checking optimality claims."""

from . import bootstrap, euler_poincare, frenet, hyperbolic, lie, reparam, verify
from .errors import VarbootError

__version__ = "0.1.0"

__all__ = ["bootstrap", "euler_poincare", "frenet", "hyperbolic", "lie", "reparam", "verify", "VarbootError"]
