"""Profile functions phi, psi, A, B, G and the inverse Hamiltonian K.

Ray quantities are handled in the shifted variable ``y = phi + mu`` (with
``mu`` the ray offset of the cone), in which ``f(y - mu, 1, ..., 1)`` is an
explicit function of ``y`` and the boundary of the cone sits at ``y = 0``.
Tabulation uses ``sigma = log(s - 1/2)`` so that both the removable point
``s = 1/2`` and the power-law tail are resolved by uniform knots.

Besides ``K`` the table carries the primitive ``F(X) = int_0^X dx / sqrt(2K(x))``.
Every time integral of the solution ODE is a difference of ``F`` values after
the substitution ``x = b w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.interpolate import BPoly

from .cones import ConePair, dom_psi, eta
from .exceptions import ConsistencyError, DomainError, ParameterError, QuadratureError, TableRangeError
from .quadrature import adaptive_panels, gauss_legendre

__all__ = [
    "EPS_SWITCH",
    "ProfileTable",
    "phi",
    "phi_prime",
    "deficit",
    "phi_taylor",
    "phi_derivative_at_half",
    "A",
    "A_prime",
    "psi",
    "build_table",
    "K",
    "asymptotic_exponent",
    "series_switch_gap",
]

EPS_SWITCH = 1e-3
TAYLOR_POINTS = 64
U_FLOOR = 1e-10
KNOT_STEP = 0.05
QUAD_RTOL = 1e-10
DEFAULT_S_MAX = 1e25
DEFAULT_X_MAX = 1e8
PRIMITIVE_X_LO = 1e-3


# ---------------------------------------------------------------------------
# Ray inversion


@lru_cache(maxsize=None)
def _ray_constants(cone: ConePair):
    """``(c0, k - l, d)`` with ``log f = c0 + (z - log(e^z + d)) / (k - l)``, ``z = log y``.

    ``d`` is None for Garding cones, where the last term is absent.
    """
    n, k, l = cone.n, cone.top, cone.bottom
    kl = k - l
    c0 = math.log(cone.normalization) + math.log(math.comb(n - 1, k - 1)) / kl
    if l == 0:
        return c0, kl, None
    c0 -= math.log(math.comb(n - 1, l - 1)) / kl
    return c0, kl, n * (k - l) / (l * k)


@lru_cache(maxsize=None)
def _half_eta(cone: ConePair) -> float:
    return 1.0 / (2.0 * eta(cone))


def _solve_ray(cone: ConePair, target: float) -> float:
    """Return ``z = log y`` with ``log f(y - mu, 1, ..., 1) = target``.

    Safeguarded Newton in ``z`` on a bracket grown geometrically in ``y``
    from ``1 + mu`` upward and from ``1e-10 (1 + mu)`` downward.
    """
    c0, kl, d = _ray_constants(cone)
    if d is not None and target >= c0:
        raise DomainError("value is not attained on the ray (s <= 1/(2 eta))")

    def g(z):
        if d is None:
            return c0 + z / kl - target, 1.0 / kl
        y = math.exp(z)
        return c0 + (z - math.log(y + d)) / kl - target, d / (y + d) / kl

    base = 1.0 + cone.ray_offset
    lo = math.log(1e-10 * base)
    while g(lo)[0] > 0.0:
        lo -= 23.0
    hi, step = math.log(base + 1.0), math.log(2.0)
    while g(hi)[0] < 0.0:
        lo = max(lo, hi)
        hi += step
        step *= 2.0
    z = kl * (target - c0)
    if not lo < z < hi:
        z = 0.5 * (lo + hi)
    for _ in range(200):
        v, dv = g(z)
        if v == 0.0:
            return z
        if v < 0.0:
            lo = z
        else:
            hi = z
        zn = z - v / dv
        if not lo <= zn <= hi:
            zn = 0.5 * (lo + hi)
        if abs(zn - z) <= 4e-16 * max(1.0, abs(zn)) or hi - lo <= 4e-16 * max(1.0, abs(hi)):
            return zn
        z = zn
    return z


def _check_phi_domain(cone: ConePair, s: np.ndarray) -> None:
    lower = _half_eta(cone)
    if np.any(~(s > lower)):
        raise DomainError(f"s must exceed 1/(2 eta) = {lower:.17g}")


def _ray_point(cone: ConePair, s: float, u: Optional[float] = None):
    """Return ``(y, D)`` with ``y = phi(s) + mu`` and ``D = 1 - phi(s)``.

    Near ``s = 1/2`` the deficit ``D`` is small and is polished by Newton steps
    on ``log f(y_e - D) = -log1p(2u)`` written with ``log1p``, where
    ``y_e = 1 + mu`` and ``f(y_e) = 1``.  This keeps ``D`` accurate to
    relative rounding instead of absolute rounding.  Pass ``u = s - 1/2``
    when it is known more accurately than ``s`` itself.
    """
    if s == 0.5:
        return 1.0 + cone.ray_offset, 0.0
    y_e = 1.0 + cone.ray_offset
    y = math.exp(_solve_ray(cone, -math.log(2.0 * s)))
    D = y_e - y
    if abs(D) < 0.5 * y_e:
        _, kl, d = _ray_constants(cone)
        rhs = -math.log1p(2.0 * (s - 0.5 if u is None else u))
        for _ in range(3):
            val = math.log1p(-D / y_e)
            der = -1.0 / (y_e - D)
            if d is not None:
                val -= math.log1p(-D / (y_e + d))
                der += 1.0 / (y_e + d - D)
            step = (val / kl - rhs) / (der / kl)
            D -= step
            if abs(step) <= 1e-17 * abs(D):
                break
        y = y_e - D
    return y, D


def deficit(cone: ConePair, s: float) -> float:
    """``1 - phi(s)`` for a scalar ``s``, accurate near ``s = 1/2``."""
    if not s > _half_eta(cone):
        raise DomainError(f"s = {s!r} outside Dom(phi)")
    return _ray_point(cone, s)[1]


def _phi_scalar(cone: ConePair, s: float) -> float:
    return 1.0 - _ray_point(cone, s)[1]


def _phi_and_slope(cone: ConePair, s: float, u: Optional[float] = None):
    """``(phi, phi', D)`` at ``s`` from one ray solve."""
    y, D = _ray_point(cone, s, u)
    _, kl, d = _ray_constants(cone)
    gz = 1.0 / kl if d is None else d / (y + d) / kl
    # f(phi) = 1/(2s) gives f_1 phi' = -1/(2 s^2), and f_1 = f gz / y.
    return 1.0 - D, -y / (s * gz), D


def phi(cone: ConePair, s):
    """Solve ``f(phi, 1, ..., 1) = 1 / (2s)``; strictly decreasing in ``s``."""
    arr = np.asarray(s, dtype=float)
    _check_phi_domain(cone, arr)
    if arr.ndim == 0:
        return _phi_scalar(cone, float(arr))
    return np.array([_phi_scalar(cone, v) for v in arr.ravel()]).reshape(arr.shape)


def phi_prime(cone: ConePair, s):
    arr = np.asarray(s, dtype=float)
    _check_phi_domain(cone, arr)
    out = np.array([_phi_and_slope(cone, v)[1] for v in np.atleast_1d(arr).ravel()])
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# Behaviour at s = 1/2


@lru_cache(maxsize=None)
def phi_taylor(cone: ConePair) -> np.ndarray:
    """Taylor coefficients ``c_m`` of ``phi(1/2 + u) = sum c_m u^m``.

    Obtained from a discrete Cauchy integral: ``phi`` is continued to a small
    circle around ``s = 1/2`` by complex Newton iteration on the ray equation.
    """
    n, mu = cone.n, cone.ray_offset
    radius = 0.1 / n
    if math.isfinite(eta(cone)):
        radius = min(radius, 0.4 * (0.5 - _half_eta(cone)))
    theta = 2.0 * np.pi * np.arange(TAYLOR_POINTS) / TAYLOR_POINTS
    u = radius * np.exp(1j * theta)
    rhs = 1.0 / (2.0 * (0.5 + u))
    y = (1.0 + mu) - 2.0 * n * u
    for _ in range(60):
        step = (cone.ray_value(y) - rhs) / cone.ray_slope(y)
        y = y - step
        if np.max(np.abs(step)) <= 1e-15 * np.max(np.abs(y)):
            break
    if np.max(np.abs(cone.ray_value(y) - rhs)) > 1e-13:
        raise ConsistencyError("complex continuation of phi did not converge")
    coeffs = np.fft.fft(y - mu) / TAYLOR_POINTS
    return np.real(coeffs) / radius ** np.arange(TAYLOR_POINTS)


def phi_derivative_at_half(cone: ConePair, step: float = 1e-5, rtol: float = 1e-6) -> float:
    """Return ``phi'(1/2) = -2n`` after checking it against a one-sided difference.

    The difference is taken on the deficit ``1 - phi``, which vanishes at 1/2
    and is computed to full relative accuracy.
    """
    exact = -2.0 * cone.n
    estimate = -(4.0 * deficit(cone, 0.5 + step) - deficit(cone, 0.5 + 2 * step)) / (2.0 * step)
    if abs(estimate - exact) > rtol * abs(exact):
        raise ConsistencyError(
            f"finite-difference phi'(1/2) = {estimate!r} disagrees with -2n = {exact}"
        )
    return exact


def _series_tail(cone: ConePair):
    """Coefficients of ``p(u) = (phi(1/2 + u) - 1 + 2n u) / u^2`` in ascending order."""
    return phi_taylor(cone)[2 : TAYLOR_POINTS // 2]


def _A_series(cone: ConePair, u):
    # 1 - phi = u (2n - u p), so A = p / (2 n s (2n - u p)).
    n = cone.n
    c = _series_tail(cone)[::-1]
    p = np.polyval(c, u)
    dp = np.polyval(np.polyder(c), u)
    s = 0.5 + u
    den = 2.0 * n * s * (2.0 * n - u * p)
    dden = 2.0 * n * (2.0 * n - u * p) + 2.0 * n * s * (-p - u * dp)
    return p / den, (dp * den - p * dden) / den**2


def _A_formula(cone: ConePair, u: float):
    n = cone.n
    s = 0.5 + u
    _, dph, D = _phi_and_slope(cone, s, u)
    a = 1.0 / (s * D) - 1.0 / (2.0 * n * s * u)
    da = -(D - s * dph) / (s * D) ** 2 + (u + s) / (2.0 * n * (s * u) ** 2)
    return a, da


def _A_pair(cone: ConePair, u: np.ndarray):
    u = np.asarray(u, dtype=float)
    a = np.empty(u.shape)
    da = np.empty(u.shape)
    near = u <= EPS_SWITCH
    if near.any():
        a[near], da[near] = _A_series(cone, u[near])
    for idx in zip(*np.nonzero(~near)):
        a[idx], da[idx] = _A_formula(cone, float(u[idx]))
    return a, da


def _A_values(cone: ConePair, u: np.ndarray) -> np.ndarray:
    """Values of A only (skips the derivative in the formula branch)."""
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape)
    near = u <= EPS_SWITCH
    if near.any():
        out[near] = _A_series(cone, u[near])[0]
    n = cone.n
    flat_u = u[~near]
    vals = np.empty(flat_u.shape)
    for i, uu in enumerate(flat_u):
        s = 0.5 + uu
        vals[i] = 1.0 / (s * _ray_point(cone, s, uu)[1]) - 1.0 / (2.0 * n * s * uu)
    out[~near] = vals
    return out


def series_switch_gap(cone: ConePair) -> float:
    """Relative gap between the closed formula and the series at ``1/2 + EPS_SWITCH``."""
    u = EPS_SWITCH
    a_formula = _A_formula(cone, u)[0]
    a_series = float(_A_series(cone, np.array(u))[0])
    return abs(a_formula - a_series) / abs(a_series)


def _check_A(cone: ConePair, s: np.ndarray, a: np.ndarray) -> None:
    floor = 1.0 / (cone.n * s)
    bad = a < floor * (1.0 - 1e-12)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ConsistencyError(
            f"A(s) = {a.ravel()[i]!r} below 1/(ns) = {floor.ravel()[i]!r} at s = {s.ravel()[i]!r}"
        )


def A(cone: ConePair, s):
    """The coefficient A(s) of the first-integral reduction, continuous at s = 1/2."""
    arr = np.asarray(s, dtype=float)
    if np.any(~(arr >= 0.5)):
        raise DomainError("A is defined for s >= 1/2")
    u = arr - 0.5
    a = _A_values(cone, np.atleast_1d(u))
    _check_A(cone, np.atleast_1d(arr), a)
    return float(a[0]) if arr.ndim == 0 else a.reshape(arr.shape)


def A_prime(cone: ConePair, s):
    arr = np.asarray(s, dtype=float)
    if np.any(~(arr >= 0.5)):
        raise DomainError("A is defined for s >= 1/2")
    da = _A_pair(cone, np.atleast_1d(arr - 0.5))[1]
    return float(da[0]) if arr.ndim == 0 else da.reshape(arr.shape)


# ---------------------------------------------------------------------------
# psi


def _phi_minus(cone: ConePair, sigma: float) -> float:
    """Solve ``f(x, -1, ..., -1) = 1 / (2 sigma)`` for x (full-line cones only)."""
    from scipy.optimize import brentq

    n = cone.n
    target = 1.0 / (2.0 * sigma)
    rest = -np.ones(n - 1)

    def value(x):
        return _f_on(cone, x, rest) - target

    lo = _ray_entry(cone, rest)
    hi = max(2.0 * lo, 1.0)
    while value(hi) < 0.0:
        hi *= 2.0
    return brentq(value, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


def _f_on(cone: ConePair, x: float, rest: np.ndarray) -> float:
    from .cones import eval_f

    return eval_f(cone, np.concatenate([[x], rest]), check=False)


def _ray_entry(cone: ConePair, rest: np.ndarray) -> float:
    """Smallest x with ``(x, rest)`` in the closure of Gamma."""
    from .cones import mu_minus

    if np.all(rest == -1.0):
        m = mu_minus(cone)
        if m is None:
            raise DomainError("ray (t, -1, ..., -1) does not meet Gamma")
        return m
    raise ParameterError("only the (x, -1, ..., -1) ray is supported")


def psi(cone: ConePair, s):
    """``psi(s) = s phi(s)``, with the negative branch for full-line cones.

    For ``s <= 0`` on a full-line cone, ``psi`` solves ``f(psi, s, ..., s) = 1/2``;
    for ``s < 0`` this equals ``-s phi_-(-s)``.
    """
    s = float(s)
    dom = dom_psi(cone)
    if not dom.contains(s):
        raise DomainError(f"s = {s!r} outside Dom(psi)")
    if s > _half_eta(cone) and s > 0.0:
        return s * _phi_scalar(cone, s)
    if s == 0.0:
        # f(psi, 0, ..., 0) = psi f(1, 0, ..., 0)
        first = np.zeros(cone.n)
        first[0] = 1.0
        from .cones import eval_f

        return 0.5 / eval_f(cone, first)
    return -s * _phi_minus(cone, -s)


# ---------------------------------------------------------------------------
# Tables


@dataclass(frozen=True, eq=False)
class ProfileTable:
    """Tabulated profile of one cone, immutable after :func:`build_table`.

    ``s_grid`` and the ``*_vals`` arrays are the requested output grid;
    ``deficit_vals`` holds ``1 - phi`` without the cancellation near s = 1/2.
    Evaluation goes through a quintic Hermite interpolant of ``B`` on a
    denser knot set in ``sigma = log(s - 1/2)``.
    """

    cone: ConePair
    s_grid: np.ndarray
    phi_vals: np.ndarray
    deficit_vals: np.ndarray
    A_vals: np.ndarray
    B_vals: np.ndarray
    G_vals: np.ndarray
    A_at_half: float
    tail_exponent: float
    s_max: float
    tail_window: tuple
    mu: float
    _sigma: np.ndarray = field(repr=False)
    _lnG_knots: np.ndarray = field(repr=False)
    _B: BPoly = field(repr=False)
    _dB: BPoly = field(repr=False)
    _A_low: tuple = field(repr=False)
    _F: Optional["_Primitive"] = field(default=None, repr=False)

    # --- G and its logarithm as functions of sigma = log(s - 1/2)

    def _lnG(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        u = np.exp(sigma)
        base = (sigma - np.log(0.5 + u)) / self.cone.n
        low = sigma < self._sigma[0]
        b = np.where(low, 0.0, 0.0)
        if np.any(low):
            a0, a1 = self._A_low
            b = np.where(low, a0 * u + 0.5 * a1 * u * u, b)
        if np.any(~low):
            b = np.where(low, b, self._B(np.clip(sigma, self._sigma[0], self._sigma[-1])))
        return base + b

    def _dlnG(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        u = np.exp(sigma)
        base = (1.0 - u / (0.5 + u)) / self.cone.n
        low = sigma < self._sigma[0]
        a0, a1 = self._A_low
        db = np.where(low, (a0 + a1 * u) * u, 0.0)
        if np.any(~low):
            db = np.where(low, db, self._dB(np.clip(sigma, self._sigma[0], self._sigma[-1])))
        return base + db

    @property
    def x_max(self) -> float:
        """Largest x for which K is interpolated rather than extrapolated."""
        return float(math.exp(self._lnG_knots[-1]))

    def G(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.5) or np.any(s > self.s_max * (1 + 1e-14)):
            raise TableRangeError(f"s outside [1/2, s_max = {self.s_max:.6g}]; rebuild the table")
        with np.errstate(divide="ignore"):
            out = np.where(s == 0.5, 0.0, np.exp(self._lnG(np.log(np.maximum(s - 0.5, 1e-300)))))
        return float(out) if out.ndim == 0 else out

    def extrapolated(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) > self.x_max

    def _sigma_of(self, lnx: np.ndarray) -> np.ndarray:
        """Invert ``lnG(sigma) = lnx`` for ``lnx`` at most ``lnG(sigma_max)``."""
        knots = self._lnG_knots
        sig = self._sigma
        n = self.cone.n
        low = lnx < knots[0]
        z = np.empty(lnx.shape)
        # Below the first knot the map is nearly linear with slope 1/n.
        z[low] = n * lnx[low] + math.log(0.5)
        idx = np.clip(np.searchsorted(knots, lnx[~low]) - 1, 0, knots.size - 2)
        lo = np.where(low, -np.inf, 0.0)
        hi = np.where(low, sig[0], 0.0)
        lo[~low] = sig[idx]
        hi[~low] = sig[idx + 1]
        w = (lnx[~low] - knots[idx]) / (knots[idx + 1] - knots[idx])
        z[~low] = sig[idx] + w * (sig[idx + 1] - sig[idx])
        for _ in range(60):
            v = self._lnG(z) - lnx
            dv = self._dlnG(z)
            lo = np.where(v < 0, np.maximum(lo, z), lo)
            hi = np.where(v > 0, np.minimum(hi, z), hi)
            zn = z - v / dv
            outside = ~((zn >= lo) & (zn <= hi))
            zn = np.where(outside & np.isfinite(lo), 0.5 * (lo + hi), zn)
            done = np.abs(zn - z) <= 1e-15 * np.maximum(1.0, np.abs(zn))
            z = zn
            if done.all():
                break
        return z

    def K(self, x):
        """Inverse of G; power-law extrapolation beyond ``x_max`` (see :meth:`extrapolated`)."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or np.any(np.isnan(x)):
            raise DomainError("K is defined for x >= 0")
        flat = np.atleast_1d(x).ravel()
        out = np.full(flat.shape, 0.5)
        pos = flat > 0
        inside = pos & (flat <= self.x_max)
        if inside.any():
            out[inside] = 0.5 + np.exp(self._sigma_of(np.log(flat[inside])))
        tail = flat > self.x_max
        if tail.any():
            out[tail] = self.s_max * (flat[tail] / self.x_max) ** (1.0 / self.tail_exponent)
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

    def K_excess(self, x):
        """``K(x) - 1/2`` without cancellation for small x."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros(flat.shape)
        inside = (flat > 0) & (flat <= self.x_max)
        if inside.any():
            out[inside] = np.exp(self._sigma_of(np.log(flat[inside])))
        tail = flat > self.x_max
        if tail.any():
            out[tail] = self.K(flat[tail]) - 0.5
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

    def K_prime(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros(flat.shape)
        inside = (flat > 0) & (flat <= self.x_max)
        if inside.any():
            xi = flat[inside]
            sig = self._sigma_of(np.log(xi))
            out[inside] = np.exp(sig) / (xi * self._dlnG(sig))
        tail = flat > self.x_max
        if tail.any():
            q = 1.0 / self.tail_exponent
            out[tail] = q * self.s_max * (flat[tail] / self.x_max) ** q / flat[tail]
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

    # --- the primitive F(X) = int_0^X dx / sqrt(2 K(x))

    @property
    def primitive(self) -> "_Primitive":
        if self._F is None:
            raise ConsistencyError("table was built without the primitive")
        return self._F

    def F(self, X):
        return self.primitive.value(X)

    def F_inverse(self, v):
        return self.primitive.inverse(v)

    @property
    def F_inf(self) -> float:
        return self.primitive.limit

    def metadata(self) -> dict:
        return {
            **self.cone.to_dict(),
            "mu_plus": self.mu,
            "tail_exponent": self.tail_exponent,
            "tail_exponent_expected": 1.0 / (1.0 + self.mu),
            "tail_window": list(self.tail_window),
            "s_max": self.s_max,
            "x_max": self.x_max,
            "A_at_half": self.A_at_half,
            "grid_size": int(self.s_grid.size),
            "eps_switch": EPS_SWITCH,
            "knot_step": KNOT_STEP,
        }


class _Primitive:
    """``F(X) = int_0^X dx / sqrt(2K(x))`` tabulated in ``log X`` with a power-law tail."""

    def __init__(self, table: ProfileTable):
        self.table = table
        x_hi = table.x_max
        x_lo = min(PRIMITIVE_X_LO, 0.5 * x_hi)
        self.x_lo, self.x_hi = x_lo, x_hi
        m = max(int(math.ceil((math.log(x_hi) - math.log(x_lo)) / KNOT_STEP)), 4)
        xi = np.linspace(math.log(x_lo), math.log(x_hi), m + 1)

        def dF(xi_nodes):
            X = np.exp(xi_nodes)
            return X / np.sqrt(2.0 * table.K(X))

        start = float(self._near_zero(np.array([x_lo]))[0])
        pieces, _ = adaptive_panels(dF, xi[:-1], xi[1:], rtol=1e-13)
        vals = start + np.concatenate([[0.0], np.cumsum(pieces)])
        X = np.exp(xi)
        Kx = table.K(X)
        d1 = X / np.sqrt(2.0 * Kx)
        d2 = d1 - X * X * table.K_prime(X) / (2.0 * Kx) ** 1.5
        self.xi = xi
        self.knots = vals
        self.poly = BPoly.from_derivatives(xi, np.column_stack([vals, d1, d2]))
        self.dpoly = self.poly.derivative()
        self.k_top = float(Kx[-1])
        mu = table.mu
        alpha = 1.0 / (2.0 * table.tail_exponent)
        if mu > 1.0:
            if alpha <= 1.0:
                raise ConsistencyError(
                    f"fitted tail exponent {table.tail_exponent!r} contradicts mu = {mu} > 1"
                )
            self.alpha = alpha
            self.limit = float(vals[-1] + x_hi / math.sqrt(2.0 * self.k_top) / (alpha - 1.0))
        else:
            self.alpha = min(alpha, 1.0)
            self.limit = math.inf

    def _near_zero(self, X):
        return gauss_legendre(lambda x: 1.0 / np.sqrt(2.0 * self.table.K(x)), np.zeros_like(X), X, order=16)

    def value(self, X):
        X = np.asarray(X, dtype=float)
        if np.any(X < 0):
            raise DomainError("F is defined for X >= 0")
        flat = np.atleast_1d(X).ravel()
        out = np.zeros(flat.shape)
        low = (flat > 0) & (flat < self.x_lo)
        if low.any():
            out[low] = self._near_zero(flat[low])
        mid = (flat >= self.x_lo) & (flat <= self.x_hi)
        if mid.any():
            out[mid] = self.poly(np.log(flat[mid]))
        top = flat > self.x_hi
        if top.any():
            out[top] = self.knots[-1] + self._tail(flat[top] / self.x_hi)
        return float(out[0]) if X.ndim == 0 else out.reshape(X.shape)

    def derivative(self, X):
        """``F'(X)`` of the interpolant (``1 / sqrt(2K)`` off the knot range)."""
        X = np.asarray(X, dtype=float)
        flat = np.atleast_1d(X).ravel()
        out = 1.0 / np.sqrt(2.0 * self.table.K(flat))
        mid = (flat >= self.x_lo) & (flat <= self.x_hi)
        if mid.any():
            out[mid] = self.dpoly(np.log(flat[mid])) / flat[mid]
        return float(out[0]) if X.ndim == 0 else out.reshape(X.shape)

    def deficit(self, X):
        """``X - F(X) = int_0^X (1 - 1/sqrt(2K))``, accurate when it is tiny."""
        X = np.asarray(X, dtype=float)
        flat = np.atleast_1d(X).ravel()
        out = np.zeros(flat.shape)
        small = (flat > 0) & (flat <= 1.0)
        if small.any():

            def integrand(x):
                return -np.expm1(-0.5 * np.log1p(2.0 * self.table.K_excess(x)))

            out[small], _ = adaptive_panels(integrand, np.zeros(int(small.sum())), flat[small], rtol=1e-12)
        big = flat > 1.0
        if big.any():
            out[big] = flat[big] - self.value(flat[big])
        return float(out[0]) if X.ndim == 0 else out.reshape(X.shape)

    def _tail(self, ratio):
        scale = self.x_hi / math.sqrt(2.0 * self.k_top)
        if self.alpha == 1.0:
            return scale * np.log(ratio)
        return scale * (ratio ** (1.0 - self.alpha) - 1.0) / (1.0 - self.alpha)

    def _tail_inverse(self, excess):
        r = excess * math.sqrt(2.0 * self.k_top) / self.x_hi
        if self.alpha == 1.0:
            return self.x_hi * np.exp(r)
        base = 1.0 + (1.0 - self.alpha) * r
        return self.x_hi * base ** (1.0 / (1.0 - self.alpha))

    def inverse(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v < 0):
            raise DomainError("F^{-1} is defined for v >= 0")
        if np.any(v >= self.limit):
            from .exceptions import HorizonError

            raise HorizonError(f"value {float(np.max(v))!r} beyond F(inf) = {self.limit!r}")
        flat = np.atleast_1d(v).ravel()
        out = np.zeros(flat.shape)
        f_lo, f_hi = self.knots[0], self.knots[-1]
        low = (flat > 0) & (flat < f_lo)
        if low.any():
            X = flat[low].copy()
            for _ in range(30):
                step = (self._near_zero(X) - flat[low]) * np.sqrt(2.0 * self.table.K(X))
                X = X - step
                if np.all(np.abs(step) <= 1e-16 * X):
                    break
            out[low] = X
        mid = (flat >= f_lo) & (flat <= f_hi)
        if mid.any():
            out[mid] = np.exp(self._invert_poly(flat[mid]))
        top = flat > f_hi
        if top.any():
            out[top] = self._tail_inverse(flat[top] - f_hi)
        return float(out[0]) if v.ndim == 0 else out.reshape(v.shape)

    def _invert_poly(self, v):
        idx = np.clip(np.searchsorted(self.knots, v) - 1, 0, self.knots.size - 2)
        lo, hi = self.xi[idx], self.xi[idx + 1]
        w = (v - self.knots[idx]) / (self.knots[idx + 1] - self.knots[idx])
        z = lo + w * (hi - lo)
        for _ in range(60):
            r = self.poly(z) - v
            lo = np.where(r < 0, np.maximum(lo, z), lo)
            hi = np.where(r > 0, np.minimum(hi, z), hi)
            zn = z - r / self.dpoly(z)
            zn = np.where((zn >= lo) & (zn <= hi), zn, 0.5 * (lo + hi))
            done = np.abs(zn - z) <= 2e-16 * np.maximum(1.0, np.abs(zn))
            z = zn
            if done.all():
                break
        return z


def _fit_slope(x, y) -> float:
    return float(np.polyfit(x, y, 1)[0])


def _build_once(cone: ConePair, s_max: float, grid_size: int, u_min: float, with_primitive: bool) -> ProfileTable:
    n = cone.n
    u_top = s_max - 0.5
    u_grid = np.geomspace(u_min, u_top, grid_size)
    u_grid[-1] = u_top
    s_grid = 0.5 + u_grid
    # Keep u consistent with the stored s values (the subtraction is exact).
    u_grid = s_grid - 0.5

    # Knots: uniform in sigma from U_FLOOR up to u_min, then each grid cell subdivided.
    sig_grid = np.log(u_grid)
    sig_lo = math.log(min(U_FLOOR, 0.1 * u_min))
    head = np.linspace(sig_lo, sig_grid[0], max(int(math.ceil((sig_grid[0] - sig_lo) / KNOT_STEP)), 1) + 1)
    parts = [head[:-1]]
    for a, b in zip(sig_grid[:-1], sig_grid[1:]):
        m = max(int(math.ceil((b - a) / KNOT_STEP)), 1)
        parts.append(np.linspace(a, b, m + 1)[:-1])
    parts.append(sig_grid[-1:])
    sigma = np.concatenate(parts)
    is_grid = np.zeros(sigma.size, dtype=bool)
    is_grid[np.searchsorted(sigma, sig_grid)] = True
    u = np.exp(sigma)
    u[is_grid] = u_grid

    a_knots, da_knots = _A_pair(cone, u)
    _check_A(cone, 0.5 + u, a_knots)

    def integrand(sig_nodes):
        uu = np.exp(sig_nodes)
        return _A_values(cone, uu) * uu

    try:
        pieces, _ = adaptive_panels(integrand, sigma[:-1], sigma[1:], rtol=QUAD_RTOL)
    except QuadratureError as exc:
        raise QuadratureError(f"B(s) quadrature for {cone.label}: {exc}") from None
    tail_c = _series_tail(cone)
    a0 = float(tail_c[0] / (2.0 * n * n))
    a1 = float(_A_series(cone, np.array(0.0))[1])
    u0 = u[0]
    b0 = a0 * u0 + 0.5 * a1 * u0 * u0
    B = b0 + np.concatenate([[0.0], np.cumsum(pieces)])
    dB = a_knots * u
    d2B = u * (a_knots + u * da_knots)
    bpoly = BPoly.from_derivatives(sigma, np.column_stack([B, dB, d2B]))
    lnG = (sigma - np.log(0.5 + u)) / n + B

    # Monotonicity of the interpolant: dlnG/dsigma > 0 on a refined sample.
    db = bpoly.derivative()
    fine = (sigma[:-1, None] + np.linspace(0, 1, 9)[None, :] * np.diff(sigma)[:, None]).ravel()
    uf = np.exp(fine)
    slope = (1.0 - uf / (0.5 + uf)) / n + db(fine)
    if np.any(~(slope > 0)) or np.any(np.diff(lnG) <= 0):
        raise ConsistencyError(f"interpolated log G is not strictly increasing for {cone.label}")

    window = (s_max / 10.0, s_max)
    s_fit = np.geomspace(*window, 64)
    sig_fit = np.log(s_fit - 0.5)
    lnG_fit = (sig_fit - np.log(s_fit)) / n + bpoly(sig_fit)
    tail_exponent = _fit_slope(np.log(s_fit), lnG_fit)

    deficit = np.array([_ray_point(cone, s, u)[1] for s, u in zip(s_grid, u_grid)])
    table = ProfileTable(
        cone=cone,
        s_grid=s_grid,
        phi_vals=1.0 - deficit,
        deficit_vals=deficit,
        A_vals=a_knots[is_grid],
        B_vals=B[is_grid],
        G_vals=np.exp(lnG[is_grid]),
        A_at_half=a0,
        tail_exponent=tail_exponent,
        s_max=float(s_max),
        tail_window=window,
        mu=float(cone.ray_offset),
        _sigma=sigma,
        _lnG_knots=lnG,
        _B=bpoly,
        _dB=db,
        _A_low=(a0, a1),
    )
    if with_primitive:
        object.__setattr__(table, "_F", _Primitive(table))
    return table


def build_table(
    cone: ConePair,
    s_max: Optional[float] = None,
    grid_size: int = 512,
    u_min: float = 1e-8,
    x_max: float = DEFAULT_X_MAX,
    with_primitive: bool = True,
) -> ProfileTable:
    """Tabulate phi, A, B, G on a log grid in ``s - 1/2`` and prepare K and F.

    With ``s_max=None`` the extent grows until ``G(s_max) >= 10 x_max``.
    """
    if grid_size < 64:
        raise ParameterError("grid_size must be at least 64")
    if s_max is not None and not s_max > 0.5 + u_min:
        raise ParameterError("s_max must exceed 1/2 + u_min")
    gap = series_switch_gap(cone)
    if gap > 1e-8:
        raise ConsistencyError(f"series and formula for A disagree by {gap:.3g} at the switch point")
    if s_max is not None:
        return _build_once(cone, float(s_max), grid_size, u_min, with_primitive)
    mu = cone.ray_offset
    s_try = max(DEFAULT_S_MAX, (40.0 * x_max) ** (1.0 + mu))
    for _ in range(20):
        table = _build_once(cone, s_try, grid_size, u_min, False)
        if table.x_max >= 10.0 * x_max:
            break
        s_try *= 10.0 ** (1.0 + mu)
    else:
        raise TableRangeError("could not reach the requested x_max")
    if with_primitive:
        object.__setattr__(table, "_F", _Primitive(table))
    return table


def K(table: ProfileTable, x):
    """``K = G^{-1}``; values beyond ``table.x_max`` are power-law extrapolations."""
    return table.K(x)


def asymptotic_exponent(table: ProfileTable, x_lo: float, x_hi: float, points: int = 64) -> float:
    """Least-squares slope of ``log K`` against ``log x`` on ``[x_lo, x_hi]``."""
    if not 0 < x_lo < x_hi:
        raise ParameterError("need 0 < x_lo < x_hi")
    if x_hi > table.x_max:
        raise TableRangeError(f"window end {x_hi:.6g} beyond the table (x_max = {table.x_max:.6g})")
    x = np.geomspace(x_lo, x_hi, points)
    return _fit_slope(np.log(x), np.log(table.K(x)))


def inequality_margins(table: ProfileTable) -> dict:
    """Worst relative margins of ``A >= 1/(ns)`` and ``(s - 1/2)/(1 - phi) >= s/n``."""
    n = table.cone.n
    s = table.s_grid
    floor = 1.0 / (n * s)
    a_margin = (table.A_vals - floor) / floor
    lhs = (s - 0.5) / table.deficit_vals
    ratio_margin = (lhs - s / n) / (s / n)
    return {"A_lower": float(a_margin.min()), "ratio_lower": float(ratio_margin.min())}


def dump_table(table: ProfileTable, stem) -> tuple:
    """Write ``<stem>.csv`` (s, phi, A, B, G) and ``<stem>.json`` metadata."""
    from .io import write_csv, write_json

    cols = {
        "s": table.s_grid,
        "phi": table.phi_vals,
        "A": table.A_vals,
        "B": table.B_vals,
        "G": table.G_vals,
    }
    return write_csv(f"{stem}.csv", cols), write_json(f"{stem}.json", table.metadata())
