"""The one-parameter family ``w^(a)`` vanishing on the boundary.

Each member solves ``t = int_0^{w(t)} ds / sqrt(2 K(b s))`` with ``b`` fixed
by ``w(1) = 1 + a``.  With the primitive ``F`` of ``1 / sqrt(2K)`` this reads
``F(b w(t)) = b t``, so evaluation is a single monotone inversion.

Two parameter conventions are in use.  The public ``a_param`` is the offset
(``w(1) = 1 + a_param``); the shooting routines take ``a_value = 1 + a_param``,
the value at ``t = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .exceptions import ConsistencyError, HorizonError, NotApplicableError, ParameterError
from .profile import ProfileTable
from .quadrature import adaptive_panels

__all__ = [
    "gamma",
    "shoot_b",
    "ShootingCurve",
    "shooting_curve",
    "FamilySolution",
    "build_family",
    "PropertyCheck",
    "TheoremBReport",
    "verify_theorem_B",
    "TheoremDTable",
    "theorem_D_table",
    "global_existence_horizon",
    "incompleteness_integral",
    "envelope_constant",
]

SHOOT_TOL = 1e-10
CHECK_TOL = 1e-8
SLOPE_T = 1e-6
SLOPE_TOL = 1e-6


def _require_global(table: ProfileTable) -> None:
    if table.mu > 1.0:
        raise NotApplicableError(
            f"mu = {table.mu:g} > 1: the only solution vanishing on the boundary is w(t) = t"
        )


def gamma(table: ProfileTable, b: float, delta: float, a_value: float) -> float:
    """``int_delta^a ds / sqrt(2 K(b s))``, strictly decreasing in ``b`` and ``delta``."""
    if not 0 <= delta < a_value or b < 0:
        raise ParameterError("need 0 <= delta < a_value and b >= 0")
    if b == 0:
        return a_value - delta
    return (table.F(b * a_value) - table.F(b * delta)) / b


def shoot_b(table: ProfileTable, a_value: float, delta: float) -> float:
    """The unique ``b`` with ``gamma(b, delta) = 1``."""
    if delta < 0:
        raise ParameterError("delta must be nonnegative")
    if math.isclose(delta, a_value - 1.0, rel_tol=0.0, abs_tol=1e-15):
        return 0.0
    if a_value <= 1.0 or delta > a_value - 1.0:
        raise ParameterError(
            f"infeasible shooting data: gamma(0, delta) = a - delta = {a_value - delta:.6g} <= 1"
        )

    def excess(b):
        return gamma(table, b, delta, a_value) - 1.0

    hi = 1.0
    while excess(hi) >= 0.0:
        hi *= 2.0
    b = brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    miss = abs(excess(b))
    if miss > SHOOT_TOL:
        raise ConsistencyError(f"shooting residual {miss:.3g} above {SHOOT_TOL}")
    return float(b)


@dataclass
class ShootingCurve:
    a_value: float
    delta_grid: np.ndarray
    b_vals: np.ndarray
    b_at_zero: float

    def checks(self) -> dict:
        order = np.argsort(self.delta_grid)
        b_sorted = self.b_vals[order]
        end = np.isclose(self.delta_grid, self.a_value - 1.0, rtol=0, atol=1e-15)
        return {
            "strictly_decreasing": bool(np.all(np.diff(b_sorted) < 0)),
            "b_at_end_zero": bool(np.all(np.abs(self.b_vals[end]) <= 1e-10)) and bool(end.any()),
            "bounded_by_twice_b0": bool(np.all(self.b_vals <= 2.0 * self.b_at_zero)),
        }


def shooting_curve(table: ProfileTable, a_value: float, delta_grid: Optional[Sequence[float]] = None) -> ShootingCurve:
    """``b^(a)(delta)`` on ``delta = (a - 1) / 2^j``, j = 0..10, unless a grid is given."""
    if delta_grid is None:
        delta_grid = (a_value - 1.0) / 2.0 ** np.arange(11)
    grid = np.asarray(delta_grid, dtype=float)
    b_vals = np.array([shoot_b(table, a_value, d) for d in grid])
    return ShootingCurve(a_value, grid, b_vals, shoot_b(table, a_value, 0.0))


@dataclass(frozen=True, eq=False)
class FamilySolution:
    """Member ``w^(a)`` with ``w(0) = 0`` and ``w(1) = 1 + a_param``."""

    a_param: float
    b: float
    horizon: float
    table: ProfileTable = field(repr=False)
    tolerances: dict = field(default_factory=lambda: {"shoot": SHOOT_TOL})

    @property
    def is_global(self) -> bool:
        return math.isinf(self.horizon)

    @property
    def a_value(self) -> float:
        return 1.0 + self.a_param

    def _check(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ParameterError("the family is defined for t >= 0")
        if np.any(t >= self.horizon):
            raise HorizonError(f"t beyond the existence horizon {self.horizon:.17g}")
        return t

    def X(self, t):
        """``b w(t)``, the argument of K along the solution."""
        t = self._check(t)
        return self.table.F_inverse(self.b * t)

    def w(self, t):
        t = self._check(t)
        if self.b == 0.0:
            return t * 1.0
        return self.X(t) / self.b

    def w_prime(self, t):
        t = self._check(t)
        if self.b == 0.0:
            return np.ones_like(t) if t.ndim else 1.0
        return np.sqrt(2.0 * self.table.K(self.X(t)))

    def excess(self, t):
        """``w(t) - t``, computed without cancellation near the boundary."""
        t = self._check(t)
        if self.b == 0.0:
            return np.zeros_like(t) if t.ndim else 0.0
        # F(X) = b t, so X - b t = X - F(X).
        return self.table.primitive.deficit(self.X(t)) / self.b

    def w_prime_from_inverse(self, t):
        """``w'`` as the reciprocal derivative of the tabulated primitive."""
        t = self._check(t)
        if self.b == 0.0:
            return np.ones_like(t) if t.ndim else 1.0
        return 1.0 / self.table.primitive.derivative(self.X(t))

    def w_double_prime(self, t):
        t = self._check(t)
        if self.b == 0.0:
            return np.zeros_like(t) if t.ndim else 0.0
        return self.b * self.table.K_prime(self.X(t))

    def metadata(self) -> dict:
        return {
            "a_param": self.a_param,
            "value_at_one": self.a_value,
            "b": self.b,
            "horizon": self.horizon,
            "is_global": self.is_global,
            "tolerances": dict(self.tolerances),
        }


def global_existence_horizon(table: ProfileTable, b: float) -> float:
    """``int_0^inf ds / sqrt(2 K(b s))``; infinite exactly when mu <= 1."""
    if not b > 0:
        raise ParameterError("b must be positive")
    return table.F_inf / b


def build_family(table: ProfileTable, a_param: float) -> FamilySolution:
    if not a_param >= 0:
        raise ParameterError("a_param must be nonnegative")
    if a_param == 0:
        return FamilySolution(0.0, 0.0, math.inf, table)
    b = shoot_b(table, 1.0 + a_param, 0.0)
    return FamilySolution(float(a_param), b, global_existence_horizon(table, b), table)


# ---------------------------------------------------------------------------
# Property checks


@dataclass
class PropertyCheck:
    number: int
    name: str
    passed: bool
    witness: Optional[float] = None
    detail: str = ""


@dataclass
class TheoremBReport:
    checks: list
    incompleteness: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.__dict__ for c in self.checks],
            "incompleteness": self.incompleteness,
        }


def incompleteness_integral(sol: FamilySolution, rel_tol: float = 1e-10) -> dict:
    """``int_1^inf dt / w(t)`` for a nonhyperbolic member.

    Substituting ``X = b w`` gives ``int_{X_1}^inf dX / (X sqrt(2 K(X)))`` with
    ``X_1 = b w(1)``.  The range up to the table end is integrated in ``log X``;
    beyond it the power-law tail of K is integrated in closed form.  The same
    value is recomputed with the cut one decade lower as a tail check.
    """
    if sol.b == 0.0:
        return {"value": math.inf, "finite": False, "tail_check": 0.0}
    table = sol.table
    x1 = sol.b * sol.a_value
    x_top = table.x_max

    def dxi(xi):
        return 1.0 / np.sqrt(2.0 * table.K(np.exp(xi)))

    def split(cut):
        lo, hi = math.log(x1), math.log(cut)
        m = max(int(math.ceil((hi - lo) / 0.5)), 1)
        edges = np.linspace(lo, hi, m + 1)
        pieces, _ = adaptive_panels(dxi, edges[:-1], edges[1:], rtol=rel_tol)
        k_cut = float(table.K(cut))
        tail = 2.0 * table.tail_exponent / math.sqrt(2.0 * k_cut)
        return float(np.sum(pieces)), tail

    if x1 >= x_top / 10.0:
        raise ParameterError("b w(1) too close to the table end; rebuild with a larger s_max")
    body, tail = split(x_top)
    body_lo, tail_lo = split(x_top / 10.0)
    value = body + tail
    return {
        "value": value,
        "finite": math.isfinite(value),
        "tail": tail,
        "tail_check": abs((body_lo + tail_lo) - value) / value,
    }


def verify_theorem_B(solutions: Sequence[FamilySolution], t_grid) -> TheoremBReport:
    """Check the six family properties on ``t_grid`` (positive times)."""
    if not solutions:
        raise ParameterError("need at least one solution")
    table = solutions[0].table
    _require_global(table)
    params = [s.a_param for s in solutions]
    if len(set(params)) != len(params):
        raise ParameterError("solutions must have distinct a_param")
    t = np.sort(np.asarray(t_grid, dtype=float))
    t = t[t > 0]
    sols = sorted(solutions, key=lambda s: s.a_param)
    checks = []

    # 1. the hyperbolic member
    hyper = build_family(table, 0.0)
    dev = float(np.max(np.abs(hyper.w(t) - t)))
    slope_dev = float(np.max(np.abs(np.asarray(hyper.w_prime(t)) - 1.0)))
    checks.append(PropertyCheck(1, "hyperbolic member w(t) = t", dev <= CHECK_TOL and slope_dev <= CHECK_TOL,
                                detail=f"max |w - t| = {dev:.3g}"))

    # 2. value at t = 1
    worst, wit = 0.0, None
    for s in sols:
        err = abs(float(s.w(1.0)) - s.a_value)
        if err > worst:
            worst, wit = err, s.a_param
    checks.append(PropertyCheck(2, "w(1) = 1 + a", worst <= CHECK_TOL, wit if worst > CHECK_TOL else None,
                                f"max error {worst:.3g}"))

    # 3. w' >= 1, w >= t, w'(0) = 1
    ok3, wit3, detail3 = True, None, ""
    for s in sols:
        wp = np.asarray(s.w_prime(t)) * np.ones_like(t)
        low_w = np.asarray(s.excess(t)) < 0
        low_wp = wp < 1.0 - CHECK_TOL
        slope0 = float(s.w_prime(SLOPE_T))
        if low_w.any() or low_wp.any():
            ok3 = False
            wit3 = float(t[np.argmax(low_w | low_wp)])
            detail3 = f"a = {s.a_param}"
            break
        if not 1.0 - CHECK_TOL <= slope0 <= 1.0 + SLOPE_TOL:
            ok3, wit3, detail3 = False, SLOPE_T, f"a = {s.a_param}, w'({SLOPE_T}) = {slope0!r}"
            break
    checks.append(PropertyCheck(3, "w' >= 1, w >= t, w'(0) = 1", ok3, wit3, detail3))

    # 4. convexity: w' = sqrt(2K(bw)) nondecreasing in t
    ok4, wit4 = True, None
    for s in sols:
        wp = np.asarray(s.w_prime(t)) * np.ones_like(t)
        drop = np.diff(wp) < -CHECK_TOL * wp[1:]
        wpp = np.asarray(s.w_double_prime(t)) * np.ones_like(t)
        if drop.any() or np.any(wpp < 0):
            ok4 = False
            wit4 = float(t[1:][np.argmax(drop)]) if drop.any() else float(t[np.argmax(wpp < 0)])
            break
    checks.append(PropertyCheck(4, "convexity w'' >= 0", ok4, wit4))

    # 5. strict ordering in a, decided on w - t so that small t stays resolved
    ok5, wit5, detail5 = True, None, ""
    for lo, hi in zip(sols[:-1], sols[1:]):
        bad = ~(lo.excess(t) < hi.excess(t))
        if bad.any():
            ok5, wit5 = False, float(t[np.argmax(bad)])
            detail5 = f"a = {lo.a_param} vs {hi.a_param}"
            break
    checks.append(PropertyCheck(5, "strict ordering in a", ok5, wit5, detail5))

    # 6. incompleteness at infinity, completeness at the boundary
    incompleteness = {}
    ok6, detail6 = True, ""
    for s in sols:
        near = float(s.w(SLOPE_T)) / SLOPE_T
        if abs(near - 1.0) > SLOPE_TOL:
            ok6, detail6 = False, f"a = {s.a_param}: w(t)/t = {near!r} at t = {SLOPE_T}"
            break
        if s.a_param > 0:
            info = incompleteness_integral(s)
            incompleteness[str(s.a_param)] = info
            if not info["finite"] or info["tail_check"] > 1e-6:
                ok6, detail6 = False, f"a = {s.a_param}: {info}"
                break
    checks.append(PropertyCheck(6, "incomplete at infinity, complete at the boundary", ok6, None, detail6))
    return TheoremBReport(checks, incompleteness)


# ---------------------------------------------------------------------------
# Blowup of the family as a -> infinity


def envelope_constant(table: ProfileTable) -> float:
    """Largest C (up to rounding) with ``K(x) >= C sqrt(x)`` for all x > 0."""
    lo = math.log(1e-8)
    hi = math.log(table.x_max)
    grid = np.linspace(lo, hi, 4000)

    def ratio(xi):
        x = np.exp(xi)
        return np.log(table.K(x)) - 0.5 * xi

    vals = ratio(grid)
    i = int(np.argmin(vals))
    if i in (0, grid.size - 1):
        raise ConsistencyError("minimum of K(x)/sqrt(x) not interior to the table")
    res = minimize_scalar(lambda z: float(ratio(z)), bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                          options={"xatol": 1e-12})
    best = min(float(res.fun), float(vals[i]))
    return math.exp(best) * (1.0 - 1e-12)


@dataclass
class TheoremDTable:
    eps: float
    a: np.ndarray
    b: np.ndarray
    w_eps: np.ndarray
    wprime_eps: np.ndarray
    envelope_C: float
    bound_ok: np.ndarray
    increasing: dict
    growth: dict

    def columns(self) -> dict:
        return {"a": self.a, "b": self.b, "w_eps": self.w_eps, "wprime_eps": self.wprime_eps}


def theorem_D_table(table: ProfileTable, eps: float, a_list, executor=None) -> TheoremDTable:
    """Rows ``(a, b, w(eps), w'(eps))`` with monotonicity and the envelope inequality.

    The inequality checked per row is
    ``eps <= 4 w(eps)^{3/4} / (3 sqrt(2C) b^{1/4})`` with ``C`` from
    :func:`envelope_constant`.  Raises ``ConsistencyError`` if a column is not
    strictly increasing.
    """
    _require_global(table)
    if not eps > 0:
        raise ParameterError("eps must be positive")
    a = np.asarray(a_list, dtype=float)
    if a.size < 2 or np.any(np.diff(a) <= 0) or a[0] < 0:
        raise ParameterError("a_list must be nonnegative and strictly increasing")
    mapper = executor.map if executor is not None else map
    sols = list(mapper(lambda v: build_family(table, float(v)), a))
    b = np.array([s.b for s in sols])
    w_eps = np.array([float(s.w(eps)) for s in sols])
    wp_eps = np.array([float(s.w_prime(eps)) for s in sols])
    C = envelope_constant(table)
    with np.errstate(divide="ignore"):
        bound = 4.0 * w_eps**0.75 / (3.0 * math.sqrt(2.0 * C) * b**0.25)
    bound_ok = eps <= bound * (1.0 + 1e-12)
    increasing = {
        "b": bool(np.all(np.diff(b) > 0)),
        "w_eps": bool(np.all(np.diff(w_eps) > 0)),
        "wprime_eps": bool(np.all(np.diff(wp_eps) > 0)),
    }
    if not all(increasing.values()):
        bad = [k for k, v in increasing.items() if not v]
        raise ConsistencyError(f"columns not strictly increasing in a: {bad}")
    with np.errstate(divide="ignore"):
        growth = {
            "b": float(b[-1] / b[0]),
            "w_eps": float(w_eps[-1] / w_eps[0]),
            "wprime_eps": float(wp_eps[-1] / wp_eps[0]),
        }
    return TheoremDTable(float(eps), a, b, w_eps, wp_eps, C, bound_ok, increasing, growth)
