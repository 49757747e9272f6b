"""The solution ODE ``w w'' = (w')^2 (1 - phi((w')^2 / 2)) / 2`` with positive data.

Two independent routes are provided.  :func:`solve_ivp` steps the ODE with an
embedded Runge-Kutta pair; :func:`quadrature_solve` inverts the first integral
``w' = sqrt(2 K(b w))`` through the tabulated primitive of ``1 / sqrt(2K)``.
Agreement of the two is the main consistency check of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .exceptions import HorizonError, ParameterError, TableRangeError
from .profile import ProfileTable, deficit

__all__ = [
    "BLOWUP_SLOPE",
    "IvpSpec",
    "Trajectory",
    "b_of",
    "solve_ivp",
    "hamiltonian_residual",
    "max_time",
    "quadrature_solve",
    "growth_check",
]

BLOWUP_SLOPE = 1e12
ODE_RTOL = 1e-10
ODE_ATOL = 1e-14


@dataclass(frozen=True)
class IvpSpec:
    """Initial data ``w(tau) = delta``, ``w'(tau) = p`` and the requested end time."""

    delta: float
    p: float
    tau: float = 0.0
    t_end: float = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta!r}")
        if not self.p >= 1:
            raise ParameterError(f"p must be at least 1, got {self.p!r}")
        if not self.tau >= 0:
            raise ParameterError(f"tau must be nonnegative, got {self.tau!r}")
        if not self.t_end > self.tau:
            raise ParameterError("t_end must exceed tau")

    def to_dict(self) -> dict:
        return {"delta": self.delta, "p": self.p, "tau": self.tau, "t_end": self.t_end}


@dataclass
class Trajectory:
    t: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    w_double_prime: np.ndarray
    status: str
    b: float
    spec: IvpSpec
    T_estimate: Optional[float] = None
    message: str = ""
    extrapolated: bool = False
    method: str = "rk"
    extra: dict = field(default_factory=dict)

    @property
    def samples(self) -> list:
        return list(zip(self.t.tolist(), self.w.tolist(), self.w_prime.tolist(), self.w_double_prime.tolist()))

    def summary(self) -> dict:
        return {
            "status": self.status,
            "b": self.b,
            "T_estimate": self.T_estimate,
            "method": self.method,
            "samples": int(self.t.size),
            "t_last": float(self.t[-1]),
            "extrapolated": self.extrapolated,
            "message": self.message,
            "spec": self.spec.to_dict(),
        }


def b_of(table: ProfileTable, delta: float, p: float) -> float:
    """First-integral constant ``b = G(p^2 / 2) / delta``."""
    if not delta > 0 or not p >= 1:
        raise ParameterError("need delta > 0 and p >= 1")
    s = 0.5 * p * p
    if s > table.s_max:
        raise TableRangeError(
            f"p^2/2 = {s:.6g} exceeds s_max = {table.s_max:.6g}; rebuild the table with a larger s_max"
        )
    if p == 1:
        return 0.0
    return float(table.G(s)) / delta


def solve_ivp(
    table: ProfileTable,
    spec: IvpSpec,
    t_eval=None,
    rtol: float = ODE_RTOL,
    blowup_slope: float = BLOWUP_SLOPE,
) -> Trajectory:
    """Integrate the ODE with DOP853 in the state ``(w, w')``.

    For mu <= 1 the solution is global, and reaching the slope cap is
    reported as ``"slope_cap"`` rather than ``"blowup"``.

    Integration runs in the local time ``t - tau`` so that shifted problems
    produce identical samples.  Blowup is declared once ``w'`` reaches
    ``blowup_slope``; ``T_estimate`` adds to the event time the remaining
    time of the local power law ``w' ~ w^alpha`` fitted from ``w, w', w''``.
    """
    cone = table.cone
    b = b_of(table, spec.delta, spec.p)

    def rhs(_t, state):
        w, v = state
        return [v, v * v * deficit(cone, 0.5 * v * v) / (2.0 * w)]

    def slope_event(_t, state):
        return state[1] - blowup_slope

    slope_event.terminal = True
    slope_event.direction = 1.0

    local_eval = None if t_eval is None else np.asarray(t_eval, dtype=float) - spec.tau
    sol = integrate.solve_ivp(
        rhs,
        (0.0, spec.t_end - spec.tau),
        [spec.delta, spec.p],
        method="DOP853",
        rtol=rtol,
        atol=ODE_ATOL,
        t_eval=local_eval,
        events=slope_event,
    )
    t_loc, w, v = sol.t, sol.y[0], sol.y[1]
    T_est = None
    if sol.status == 1 and not math.isfinite(table.F_inf):
        # global solution whose slope outgrew the cap (exponential growth when mu = 1)
        status = "slope_cap"
    elif sol.status == 1:
        status = "blowup"
        t_ev = float(sol.t_events[0][0])
        w_ev, v_ev = sol.y_events[0][0]
        if local_eval is not None:
            t_loc = np.append(t_loc, t_ev)
            w = np.append(w, w_ev)
            v = np.append(v, v_ev)
        acc = rhs(t_ev, [w_ev, v_ev])[1]
        rate = acc / v_ev - v_ev / w_ev
        T_est = spec.tau + t_ev + (1.0 / rate if rate > 0 else 0.0)
    elif sol.status == 0:
        status = "reached_horizon"
    else:
        status = "step_underflow"
    wpp = np.array([rhs(0.0, [a, c])[1] for a, c in zip(w, v)])
    return Trajectory(
        t=spec.tau + t_loc,
        w=w,
        w_prime=v,
        w_double_prime=wpp,
        status=status,
        b=b,
        spec=spec,
        T_estimate=T_est,
        message=sol.message,
        extrapolated=bool(np.any(table.extrapolated(b * w))),
        method="rk",
    )


def hamiltonian_residual(table: ProfileTable, traj: Trajectory) -> float:
    """``max |w' - sqrt(2 K(b w))| / (1 + w')`` over the samples."""
    predicted = np.sqrt(2.0 * table.K(traj.b * traj.w))
    return float(np.max(np.abs(traj.w_prime - predicted) / (1.0 + traj.w_prime)))


def max_time(table: ProfileTable, delta: float, p: float) -> float:
    """Maximal existence time ``int_delta^inf dw / sqrt(2 K(b w))``; ``inf`` when mu <= 1."""
    b = b_of(table, delta, p)
    if b == 0.0 or not math.isfinite(table.F_inf):
        return math.inf
    return (table.F_inf - table.F(b * delta)) / b


def quadrature_solve(table: ProfileTable, spec: IvpSpec, t_query) -> Trajectory:
    """Solve by inverting ``t - tau = int_delta^w ds / sqrt(2 K(b s))``."""
    t = np.atleast_1d(np.asarray(t_query, dtype=float))
    if np.any(t < spec.tau):
        raise ParameterError("query times must not precede tau")
    b = b_of(table, spec.delta, spec.p)
    if b == 0.0:
        w = spec.delta + (t - spec.tau)
        ones = np.ones_like(t)
        return Trajectory(t, w, ones, np.zeros_like(t), "reached_horizon", 0.0, spec, method="quadrature")
    horizon = max_time(table, spec.delta, spec.p)
    if np.any(t - spec.tau >= horizon):
        raise HorizonError(f"query time beyond the maximal time tau + {horizon:.17g}")
    X = table.F_inverse(b * (t - spec.tau) + table.F(b * spec.delta))
    w = X / b
    return Trajectory(
        t=t,
        w=w,
        w_prime=np.sqrt(2.0 * table.K(X)),
        w_double_prime=b * table.K_prime(X),
        status="reached_horizon",
        b=b,
        spec=spec,
        extrapolated=bool(np.any(table.extrapolated(X))),
        method="quadrature",
    )


def growth_check(traj: Trajectory, rtol: float = 1e-10):
    """Check ``w' <= C w`` with ``C = p / delta`` along the samples.

    ``w'/w`` is nonincreasing whenever ``phi >= -1``, which holds for mu <= 1.
    Returns ``(ok, C, worst ratio of w' / (C w))``.
    """
    C = traj.spec.p / traj.spec.delta
    ratio = traj.w_prime / (C * traj.w)
    worst = float(np.max(ratio))
    return worst <= 1.0 + rtol, C, worst


def dump_trajectory(table: ProfileTable, traj: Trajectory, stem, manifest: Optional[dict] = None):
    from .io import write_csv, write_json

    residual = np.abs(traj.w_prime - np.sqrt(2.0 * table.K(traj.b * traj.w))) / (1.0 + traj.w_prime)
    cols = {
        "t": traj.t,
        "w": traj.w,
        "w_prime": traj.w_prime,
        "w_double_prime": traj.w_double_prime,
        "residual": residual,
    }
    meta = {**(manifest or {}), **traj.summary()}
    return write_csv(f"{stem}.csv", cols), write_json(f"{stem}.json", meta)
