"""Admissible pairs (f, Gamma) and their scalar invariants.

Every pair is of the form ``f = c * (sigma_k / sigma_l) ** (1 / (k - l))`` on
the Garding cone ``Gamma_k^+`` with ``0 <= l < k <= n``.  ``l = 0`` is the
Garding family ``c_{n,k} sigma_k^{1/k}``; the other members are reached through
the named registry of custom forms.  The constant ``c`` enforces ``f(e) = 1``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import DomainError, ParameterError

__all__ = [
    "ConePair",
    "ConeInvariants",
    "DomPsi",
    "ConcaveRayReport",
    "REGISTRY",
    "elementary_symmetric",
    "eval_f",
    "grad_f",
    "contains",
    "mu_plus",
    "eta",
    "dom_psi",
    "mu_minus",
    "check_concave_ray",
    "invariants",
]

# Floating membership uses sigma_j > MEMBERSHIP_MARGIN * scale_j.
MEMBERSHIP_MARGIN = 1e-14
ETA_CAP = 1e8
ETA_MAX_DOUBLINGS = 1000
BISECT_TOL = 1e-12


def _harmonic(n: int) -> tuple[int, int]:
    return n, n - 1


# name -> map from n to (k, l); f = c (sigma_k / sigma_l)^(1/(k-l)) on Gamma_k^+.
REGISTRY: dict[str, Callable[[int], tuple[int, int]]] = {
    "harmonic": _harmonic,
}
_QUOTIENT_RE = re.compile(r"^quotient_(\d+)_(\d+)$")


def _resolve_registry(name: str, n: int) -> tuple[int, int]:
    if name in REGISTRY:
        return REGISTRY[name](n)
    m = _QUOTIENT_RE.match(name)
    if m:
        return int(m.group(1)), int(m.group(2))
    raise ParameterError(
        f"unknown registry form {name!r}; known: {sorted(REGISTRY)} or quotient_<k>_<l>"
    )


@dataclass(frozen=True)
class ConePair:
    """A dimension ``n`` together with a defining pair (f, Gamma)."""

    n: int
    kind: str = "garding"
    k: Optional[int] = None
    registry: Optional[str] = None
    top: int = field(init=False, repr=False, compare=False)
    bottom: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 3:
            raise ParameterError(f"dimension must be an integer >= 3, got {self.n!r}")
        if self.kind == "garding":
            if self.k is None or not 1 <= self.k <= self.n:
                raise ParameterError(f"garding cone needs 1 <= k <= n, got k={self.k!r}")
            top, bottom = int(self.k), 0
        elif self.kind == "custom":
            if not self.registry:
                raise ParameterError("custom cone needs a registry name")
            top, bottom = _resolve_registry(self.registry, self.n)
            if not 0 <= bottom < top <= self.n:
                raise ParameterError(
                    f"registry form {self.registry!r} needs 0 <= l < k <= n, got ({top}, {bottom})"
                )
        else:
            raise ParameterError(f"kind must be 'garding' or 'custom', got {self.kind!r}")
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "bottom", bottom)

    @classmethod
    def garding(cls, n: int, k: int) -> "ConePair":
        return cls(n=n, kind="garding", k=k)

    @classmethod
    def custom(cls, n: int, registry: str) -> "ConePair":
        return cls(n=n, kind="custom", registry=registry)

    @classmethod
    def from_json(cls, source) -> "ConePair":
        """Build from a dict, an inline JSON string, or a path to a JSON file."""
        if isinstance(source, dict):
            data = source
        else:
            text = str(source)
            if not text.lstrip().startswith("{") and Path(text).is_file():
                text = Path(text).read_text()
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParameterError(f"malformed cone JSON: {exc}") from None
        if not isinstance(data, dict) or "n" not in data:
            raise ParameterError("cone JSON must be an object with at least 'n'")
        kind = data.get("kind", "garding")
        return cls(n=int(data["n"]), kind=kind, k=data.get("k"), registry=data.get("registry"))

    def to_dict(self) -> dict:
        out = {"n": int(self.n), "kind": self.kind}
        if self.kind == "garding":
            out["k"] = int(self.k)
        else:
            out["registry"] = self.registry
        return out

    @property
    def label(self) -> str:
        if self.kind == "garding":
            return f"garding(n={self.n},k={self.k})"
        return f"custom(n={self.n},{self.registry})"

    @property
    def normalization(self) -> float:
        n, k, l = self.n, self.top, self.bottom
        return (math.comb(n, l) / math.comb(n, k)) ** (1.0 / (k - l))

    @property
    def ray_offset(self) -> float:
        """Exact boundary crossing of (-t, 1, ..., 1) for the underlying Gamma_k^+."""
        return (self.n - self.top) / self.top

    # Evaluation along the ray (y - ray_offset, 1, ..., 1).  On this ray
    # sigma_j = C(n-1, j-1) * (y + n (k - j) / (j k)), so sigma_k vanishes
    # exactly at y = 0 and no cancellation occurs near the boundary.

    def _ray_sigma(self, j: int, y):
        if j == 0:
            return np.ones_like(y)
        n, k = self.n, self.top
        return math.comb(n - 1, j - 1) * (y + n * (k - j) / (j * k))

    def ray_log_value(self, y):
        """``log f(y - mu, 1, ..., 1)`` for real ``y > 0``."""
        y = np.asarray(y, dtype=float)
        k, l = self.top, self.bottom
        with np.errstate(divide="ignore"):
            out = math.log(self.normalization) + math.log(math.comb(self.n - 1, k - 1)) / (k - l)
            out = out + np.log(y) / (k - l)
            if l:
                out = out - np.log(self._ray_sigma(l, y)) / (k - l)
        return out

    def ray_value(self, y):
        """``f(y - mu, 1, ..., 1)``; accepts complex ``y`` near the positive axis."""
        y = np.asarray(y)
        k, l = self.top, self.bottom
        q = self._ray_sigma(k, y)
        if l:
            q = q / self._ray_sigma(l, y)
        return self.normalization * q ** (1.0 / (k - l))

    def ray_slope(self, y):
        """``df/dlambda_1`` at ``(y - mu, 1, ..., 1)``; complex-capable."""
        y = np.asarray(y)
        k, l = self.top, self.bottom
        inner = 1.0 / y
        if l:
            inner = inner - 1.0 / (y + self.n * (k - l) / (l * k))
        return self.ray_value(y) * inner / (k - l)


def elementary_symmetric(lam) -> np.ndarray:
    """All elementary symmetric polynomials ``sigma_0..sigma_n`` of the last axis."""
    lam = np.asarray(lam)
    n = lam.shape[-1]
    dtype = np.result_type(lam.dtype, float)
    e = np.zeros(lam.shape[:-1] + (n + 1,), dtype=dtype)
    e[..., 0] = 1.0
    for i in range(n):
        e[..., 1 : i + 2] = e[..., 1 : i + 2] + lam[..., i, None] * e[..., 0 : i + 1]
    return e


def _exact_sigma(values: Sequence[Fraction]) -> list[Fraction]:
    e = [Fraction(1)] + [Fraction(0)] * len(values)
    for i, v in enumerate(values):
        for j in range(i + 1, 0, -1):
            e[j] += v * e[j - 1]
    return e


def _is_rational_input(lam) -> bool:
    return (
        isinstance(lam, (list, tuple))
        and len(lam) > 0
        and all(isinstance(v, Rational) and not isinstance(v, bool) for v in lam)
    )


def _first_failure(cone: ConePair, lam) -> Optional[int]:
    """Index j of the first sigma_j (j <= k) that is not strictly positive, or None."""
    k = cone.top
    if _is_rational_input(lam):
        sig = _exact_sigma([Fraction(v) for v in lam])
        for j in range(1, k + 1):
            if sig[j] <= 0:
                return j
        return None
    arr = np.asarray(lam, dtype=float)
    sig = elementary_symmetric(arr)
    big = float(np.max(np.abs(arr))) if arr.size else 0.0
    for j in range(1, k + 1):
        scale = math.comb(cone.n, j) * big**j
        if not sig[j] > MEMBERSHIP_MARGIN * scale:
            return j
    return None


def _check_length(cone: ConePair, lam) -> None:
    if len(lam) != cone.n:
        raise DomainError(f"expected a vector of length {cone.n}, got {len(lam)}")


def contains(cone: ConePair, lam) -> bool:
    """Strict membership ``lam in Gamma``.

    Lists of ints or Fractions are decided in exact arithmetic; floating input
    must clear a relative margin of 1e-14.
    """
    _check_length(cone, lam)
    return _first_failure(cone, lam) is None


def eval_f(cone: ConePair, lam, check: bool = True) -> float:
    """Evaluate the defining function at ``lam``.

    With ``check=False`` the membership test is skipped and points of the
    closure evaluate by continuity (``f = 0`` on the boundary).
    """
    _check_length(cone, lam)
    if check:
        bad = _first_failure(cone, lam)
        if bad is not None:
            raise DomainError(f"lambda not in Gamma: sigma_{bad}(lambda) <= 0")
    sig = elementary_symmetric(np.asarray(lam, dtype=float))
    k, l = cone.top, cone.bottom
    q = max(sig[k], 0.0) / sig[l]
    return float(cone.normalization * q ** (1.0 / (k - l)))


def grad_f(cone: ConePair, lam) -> np.ndarray:
    """Analytic gradient of f at an interior point."""
    lam = np.asarray(lam, dtype=float)
    value = eval_f(cone, lam)
    k, l = cone.top, cone.bottom
    sig = elementary_symmetric(lam)
    grad = np.empty(cone.n)
    for i in range(cone.n):
        rest = elementary_symmetric(np.delete(lam, i))
        d_top = rest[k - 1] / sig[k]
        d_bottom = rest[l - 1] / sig[l] if l else 0.0
        grad[i] = value * (d_top - d_bottom) / (k - l)
    return grad


def mu_plus(cone: ConePair, method: str = "auto") -> float:
    """The number mu with ``(-mu, 1, ..., 1)`` on the boundary of Gamma.

    Garding cones use the exact value ``(n - k) / k``; custom cones, or
    ``method="bisect"``, bisect the membership test on ``[0, n - 1]``.
    """
    if method not in ("auto", "bisect"):
        raise ParameterError(f"unknown method {method!r}")
    if method == "auto" and cone.kind == "garding":
        return (cone.n - cone.k) / cone.k
    ones = np.ones(cone.n)

    def inside(t: float) -> bool:
        pt = ones.copy()
        pt[0] = -t
        return _first_failure(cone, pt) is None

    lo, hi = 0.0, float(cone.n - 1)
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def eta(cone: ConePair, cap: float = ETA_CAP, max_doublings: int = ETA_MAX_DOUBLINGS) -> float:
    """``lim f(R, 1, ..., 1)`` along R = 2^j; ``inf`` once the cap is exceeded.

    Convergent sequences are Richardson-extrapolated assuming an O(1/R) error.
    A sequence that neither converges nor exceeds the cap is reported as ``inf``.
    """
    mu = cone.ray_offset
    prev = None
    for j in range(max_doublings):
        value = math.exp(float(cone.ray_log_value(2.0**j + mu)))
        if value > cap:
            return math.inf
        if prev is not None and abs(value - prev) <= 1e-13 * value:
            return 2.0 * value - prev
        prev = value
    return math.inf


@dataclass(frozen=True)
class DomPsi:
    """Domain of psi: the whole line or the half line ``(lower, inf)``."""

    kind: str
    lower: Optional[float] = None

    def contains(self, s: float) -> bool:
        return self.kind == "full_line" or s > self.lower

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lower": self.lower}


def dom_psi(cone: ConePair) -> DomPsi:
    first = np.zeros(cone.n)
    first[0] = 1.0
    if contains(cone, first):
        return DomPsi("full_line")
    return DomPsi("half_line", 1.0 / (2.0 * eta(cone)))


def mu_minus(cone: ConePair) -> Optional[float]:
    """Boundary value of the ray ``(t, -1, ..., -1)``, or None if it misses Gamma."""
    pt = -np.ones(cone.n)

    def inside(t: float) -> bool:
        pt[0] = t
        return _first_failure(cone, pt) is None

    hi = 1.0
    while not inside(hi):
        hi *= 2.0
        if hi > 1e12:
            return None
    lo = 0.0
    while hi - lo > BISECT_TOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass
class ConcaveRayReport:
    ok: bool
    worst_margin: float
    violations: list = field(default_factory=list)


def check_concave_ray(cone: ConePair, t_grid, tol: float = 1e-12) -> ConcaveRayReport:
    """Check ``f(t, 1, ..., 1) <= 1 + (t - 1) / n`` on a grid of t > -mu."""
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    mu = cone.ray_offset
    if np.any(t <= -mu):
        raise DomainError(f"t_grid must lie in (-mu, inf) = ({-mu}, inf)")
    lhs = np.exp(cone.ray_log_value(t + mu))
    margin = 1.0 + (t - 1.0) / cone.n - lhs
    bad = t[margin < -tol * np.maximum(1.0, np.abs(lhs))]
    return ConcaveRayReport(ok=bad.size == 0, worst_margin=float(margin.min()), violations=bad.tolist())


@dataclass(frozen=True)
class ConeInvariants:
    mu_plus: float
    mu_minus: Optional[float]
    eta: float
    dom_psi: DomPsi
    concave_ray_ok: bool

    def to_dict(self) -> dict:
        return {
            "mu_plus": self.mu_plus,
            "mu_minus": self.mu_minus,
            "eta": "inf" if math.isinf(self.eta) else self.eta,
            "dom_psi": self.dom_psi.to_dict(),
            "concave_ray_ok": self.concave_ray_ok,
        }


def invariants(cone: ConePair) -> ConeInvariants:
    mu = mu_plus(cone)
    grid = -mu + np.geomspace(1e-6, 1e6, 400)
    return ConeInvariants(
        mu_plus=mu,
        mu_minus=mu_minus(cone),
        eta=eta(cone),
        dom_psi=dom_psi(cone),
        concave_ray_ok=check_concave_ray(cone, grid).ok,
    )
