"""Radial barriers and the explicit failure of comparison for mu <= 1.

For a conformal factor depending only on the distance ``d`` to a centre the
eigenvalues of ``-A_h`` are ``lambda_1 = -h h'' + h'^2 / 2`` (once) and
``lambda_2 = -h h' / d + h'^2 / 2`` (``n - 1`` times).  For a factor depending
only on ``t = x_n`` they are ``-w w'' + w'^2 / 2`` and ``w'^2 / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cones import ConePair, eval_f
from .exceptions import DomainError, NotApplicableError, ParameterError
from .family import build_family
from .profile import ProfileTable

__all__ = [
    "BarrierSpec",
    "BallProfile",
    "AnnulusProfile",
    "ExteriorBallProfile",
    "HalfspaceProfile",
    "radial_eigenvalues",
    "halfspace_eigenvalues",
    "annulus_margins",
    "AnnulusCertificate",
    "certify_annulus_supersolution",
    "Witness",
    "counterexample_witness",
    "exterior_barrier_value",
]


@dataclass(frozen=True)
class BallProfile:
    """``h(d) = (R^2 - d^2) / (2R)``, the hyperbolic metric of the ball."""

    R: float

    def derivatives(self, d):
        d = np.asarray(d, dtype=float)
        return (self.R**2 - d**2) / (2 * self.R), -d / self.R, np.full(d.shape, -1.0 / self.R)


@dataclass(frozen=True)
class AnnulusProfile:
    """``h(d) = (d - r) + C (d - r)^2`` on ``d >= r``."""

    r: float
    C: float

    def derivatives(self, d):
        e = np.asarray(d, dtype=float) - self.r
        return e + self.C * e * e, 1.0 + 2.0 * self.C * e, np.full(e.shape, 2.0 * self.C)


@dataclass(frozen=True)
class ExteriorBallProfile:
    """``h(d) = (d^2 - R^2) / (2R)`` outside a ball."""

    R: float

    def derivatives(self, d):
        d = np.asarray(d, dtype=float)
        return (d**2 - self.R**2) / (2 * self.R), d / self.R, np.full(d.shape, 1.0 / self.R)


def radial_eigenvalues(h, d):
    """``(lambda_1, lambda_2)`` of ``-A_h`` for a radial profile at distance ``d``."""
    d = np.asarray(d, dtype=float)
    value, first, second = h.derivatives(d)
    if np.any(value < 0) or np.any(d <= 0):
        raise DomainError("radial profile must be nonnegative at positive distance")
    lam1 = -value * second + 0.5 * first**2
    lam2 = -value * first / d + 0.5 * first**2
    if lam1.ndim == 0:
        return float(lam1), float(lam2)
    return lam1, lam2


@dataclass(frozen=True)
class HalfspaceProfile:
    """A factor of ``t = x_n`` given by callables for ``w, w', w''``."""

    w: Callable
    w_prime: Callable
    w_double_prime: Callable

    @classmethod
    def linear(cls, slope: float) -> "HalfspaceProfile":
        return cls(lambda t: slope * np.asarray(t, dtype=float),
                   lambda t: slope + 0.0 * np.asarray(t, dtype=float),
                   lambda t: 0.0 * np.asarray(t, dtype=float))


def halfspace_eigenvalues(profile, t):
    """``(lambda_1, lambda_2)`` of ``-A_w`` for ``w = w(x_n)``.

    ``profile`` is anything with ``w``, ``w_prime`` and ``w_double_prime``
    methods, e.g. a :class:`~halfspace_ln.family.FamilySolution`.
    """
    w = np.asarray(profile.w(t), dtype=float)
    if np.any(w <= 0):
        raise DomainError("w must be positive")
    wp = np.asarray(profile.w_prime(t), dtype=float)
    wpp = np.asarray(profile.w_double_prime(t), dtype=float)
    lam1 = -w * wpp + 0.5 * wp**2
    lam2 = 0.5 * wp**2
    if lam1.ndim == 0:
        return float(lam1), float(lam2)
    return lam1, lam2


def equation_residual(cone: ConePair, profile, t) -> np.ndarray:
    """``f(lambda_1, lambda_2, ..., lambda_2) - 1/2`` along ``t``.

    For large ``w'`` the point approaches the cone boundary relative to its
    size, so the residual loses digits roughly in proportion to ``w'^4``.
    """
    lam1, lam2 = halfspace_eigenvalues(profile, np.atleast_1d(np.asarray(t, dtype=float)))
    out = [eval_f(cone, np.concatenate([[a], np.full(cone.n - 1, b)])) - 0.5 for a, b in zip(lam1, lam2)]
    return np.array(out)


# ---------------------------------------------------------------------------
# Annular supersolution


@dataclass(frozen=True)
class BarrierSpec:
    kind: str
    center: tuple = ()
    R: float = math.nan
    r1: float = math.nan
    r: float = math.nan
    C: float = math.nan
    b: float = math.nan

    def __post_init__(self):
        if self.kind not in ("hyperbolic_ball", "annulus_super", "exterior_ball"):
            raise ParameterError(f"unknown barrier kind {self.kind!r}")

    @classmethod
    def annulus(cls, R: float, r1: float, C: float, r: Optional[float] = None, center=()) -> "BarrierSpec":
        if r is None:
            r = math.sqrt(R * R - r1 * r1)
        return cls("annulus_super", tuple(center), float(R), float(r1), float(r), float(C))

    @property
    def outer(self) -> float:
        return math.sqrt(self.R**2 + self.r1**2)

    def profile(self):
        if self.kind == "hyperbolic_ball":
            return BallProfile(self.R)
        if self.kind == "annulus_super":
            return AnnulusProfile(self.r, self.C)
        return ExteriorBallProfile(self.R)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("kind", "center", "R", "r1", "r", "C", "b")}


def annulus_margins(spec: BarrierSpec) -> dict:
    """Signed margins of every hypothesis on the annular barrier (positive = satisfied)."""
    R, r1, r, C = spec.R, spec.r1, spec.r, spec.C
    return {
        "R_minus_200": R - 200.0,
        "ratio_gap": 1.0 / 200.0 - r1**2 / R**2,
        "r_lower": r - math.sqrt(R**2 - r1**2),
        "r_upper": R - r,
        "C_lower": C - 9.0 * R**2 / r1**4,
        "C_upper": R**3 / (21.0 * r1**4) - C,
        "outer_value": C * (spec.outer - R) ** 2 - 1.0,
    }


@dataclass
class AnnulusCertificate:
    feasible: bool
    certified: bool
    margins: dict
    checks: dict = field(default_factory=dict)
    grid: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.feasible and self.certified

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "certified": self.certified, "passed": self.passed,
                "margins": self.margins, "checks": self.checks}


def certify_annulus_supersolution(cone: ConePair, spec: BarrierSpec, grid_size: int = 10_000) -> AnnulusCertificate:
    """Certify ``f(lambda(-A_h)) >= 1/2`` on ``[r, sqrt(R^2 + r1^2)]``.

    With ``e = d - r`` one has ``lambda_1 = 1/2`` identically and
    ``lambda_2 - 1/2 = e q(d)`` where
    ``q = 2C + 2C^2 e - (1 + 3Ce + 2C^2 e^2) / d``.  The grid minimum of ``q``
    minus a Lipschitz bound times half the spacing is a certificate that
    ``lambda_2 >= 1/2`` on the whole interval; ``lambda_1 = 1/2`` then gives
    ``f >= f(1/2, ..., 1/2) = 1/2`` by monotonicity.  The cruder bound
    ``2C - 7/(4d) - 5C^2 e^2 / d`` is certified the same way.
    """
    if spec.kind != "annulus_super":
        raise ParameterError("certification applies to annulus_super barriers")
    margins = annulus_margins(spec)
    feasible = all(v > 0 for k, v in margins.items() if k not in ("r_lower", "r_upper", "outer_value"))
    feasible = feasible and margins["r_lower"] >= -1e-12 * spec.R and margins["r_upper"] > 0
    feasible = feasible and margins["outer_value"] >= 0
    if not feasible:
        return AnnulusCertificate(False, False, margins)

    r, C, d_hi = spec.r, spec.C, spec.outer
    d = np.linspace(r, d_hi, grid_size)
    e = d - r
    e_max = d_hi - r
    spacing = (d_hi - r) / (grid_size - 1)
    prof = spec.profile()
    lam1, lam2 = radial_eigenvalues(prof, d)
    q = 2 * C + 2 * C * C * e - (1 + 3 * C * e + 2 * C * C * e * e) / d
    # |dq/dd| <= 2C^2 + (3C + 4C^2 e_max) / r + (1 + 3C e_max + 2C^2 e_max^2) / r^2
    lip_q = 2 * C * C + (3 * C + 4 * C * C * e_max) / r + (1 + 3 * C * e_max + 2 * C * C * e_max**2) / r**2
    phi_bound = 2 * C - 7.0 / (4 * d) - 5 * C * C * e * e / d
    lip_phi = 7.0 / (4 * r * r) + 10 * C * C * e_max / r + 5 * C * C * e_max**2 / r**2
    pad = 0.5 * spacing
    value_lo = float(prof.derivatives(r)[0])
    value_hi = float(prof.derivatives(d_hi)[0])
    f_vals = np.array([eval_f(cone, np.concatenate([[a], np.full(cone.n - 1, b)]), check=False)
                       for a, b in zip(lam1[:: max(grid_size // 200, 1)], lam2[:: max(grid_size // 200, 1)])])
    checks = {
        "lambda1_identity": float(np.max(np.abs(lam1 - 0.5))),
        "q_certified_min": float(q.min() - lip_q * pad),
        "phi_bound_certified_min": float(phi_bound.min() - lip_phi * pad),
        "lambda2_minus_half_min": float(np.min(lam2 - 0.5)),
        "h_at_r": value_lo,
        "h_at_outer": value_hi,
        "f_minus_half_min": float(f_vals.min() - 0.5),
    }
    certified = (
        checks["lambda1_identity"] <= 1e-12
        and checks["q_certified_min"] > 0
        and checks["phi_bound_certified_min"] >= 0
        and abs(value_lo) <= 1e-12
        and value_hi >= 1.0
        and checks["f_minus_half_min"] >= -1e-12
    )
    grid = {"d": d, "lambda2_minus_half": lam2 - 0.5, "phi_bound": phi_bound}
    return AnnulusCertificate(True, bool(certified), margins, checks, grid)


# ---------------------------------------------------------------------------
# Counterexample to comparison


def exterior_barrier_value(x, center, R: float) -> float:
    """``(|x - center|^2 - R^2) / (2R)``."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(center, dtype=float)
    return float((np.sum((x - c) ** 2) - R * R) / (2.0 * R))


@dataclass(frozen=True)
class Witness:
    b: float
    R: float
    x_n: float
    barrier_value: float
    u_value: float
    n: int

    @property
    def center(self) -> tuple:
        return (0.0,) * (self.n - 1) + (-self.b,)

    @property
    def point(self) -> tuple:
        return (0.0,) * (self.n - 1) + (self.x_n,)

    def recompute(self) -> float:
        return exterior_barrier_value(self.point, self.center, self.R)

    def to_dict(self) -> dict:
        return {"b": self.b, "R": self.R, "x_n": self.x_n, "barrier_value": self.barrier_value,
                "u_value": self.u_value, "center": list(self.center), "point": list(self.point)}


def counterexample_witness(table: ProfileTable, a_param: float, x_n: float = 1.0,
                           b_start: float = 2.0, max_doublings: int = 20) -> Optional[Witness]:
    """Find an exterior-ball barrier lying below ``u = w^(a)`` at ``(0, x_n)``.

    The barrier centred at ``(0, -b)`` with radius ``R < b`` equals
    ``((x_n + b)^2 - R^2) / (2R)`` on the axis.  The schedule doubles ``b``
    from ``b_start`` with ``R = b - 1/b``, along which the value decreases to
    ``x_n``.  Returns None when no barrier on the schedule goes below ``u``
    (always the case for ``a = 0``).  The number of doublings is capped so
    that ``|x - c|^2 - R^2`` is still free of cancellation.
    """
    if table.mu > 1.0:
        raise NotApplicableError("comparison can only fail when mu <= 1")
    if a_param < 0:
        raise ParameterError("a_param must be nonnegative")
    u_val = float(build_family(table, a_param).w(x_n))
    n = table.cone.n
    b = b_start
    for _ in range(max_doublings):
        R = b - 1.0 / b
        point = (0.0,) * (n - 1) + (x_n,)
        center = (0.0,) * (n - 1) + (-b,)
        value = exterior_barrier_value(point, center, R)
        if value < u_val:
            return Witness(b, R, x_n, value, u_val, n)
        b *= 2.0
    return None
