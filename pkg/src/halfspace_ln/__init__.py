"""Radial solutions of the fully nonlinear Loewner-Nirenberg problem on a half-space."""

from .cones import ConePair, eta, eval_f, grad_f, invariants, mu_minus, mu_plus
from .exceptions import (
    ConsistencyError,
    DomainError,
    HalfspaceError,
    HorizonError,
    NotApplicableError,
    ParameterError,
    QuadratureError,
    TableRangeError,
)
from .family import build_family, shooting_curve, theorem_D_table, verify_theorem_B
from .ivp import IvpSpec, max_time, quadrature_solve, solve_ivp
from .profile import ProfileTable, build_table, phi, psi

__version__ = "0.1.0"

__all__ = [
    "ConePair", "eta", "eval_f", "grad_f", "invariants", "mu_minus", "mu_plus",
    "ConsistencyError", "DomainError", "HalfspaceError", "HorizonError",
    "NotApplicableError", "ParameterError", "QuadratureError", "TableRangeError",
    "build_family", "shooting_curve", "theorem_D_table", "verify_theorem_B",
    "IvpSpec", "max_time", "quadrature_solve", "solve_ivp",
    "ProfileTable", "build_table", "phi", "psi",
]
