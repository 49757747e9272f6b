import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cached_table
from halfspace_ln.cones import ConePair
from halfspace_ln.exceptions import DomainError, TableRangeError
from halfspace_ln.profile import (
    A,
    asymptotic_exponent,
    build_table,
    deficit,
    dump_table,
    inequality_margins,
    phi,
    phi_derivative_at_half,
    psi,
    series_switch_gap,
)
from oracle_values import GENERIC, PRIMITIVE, PRIMITIVE_INF


def closed_forms(n, k):
    """Symbolic solutions (written in u = s - 1/2 to keep relative accuracy) of f(phi, 1, ..., 1) = 1/(2s) for k = 1 and (4, 2)."""
    if k == 1:
        return dict(
            phi=lambda s: n / (2 * s) - (n - 1),
            A=lambda s: 1 / (n * s),
            B=lambda s: np.log1p(2 * (s - 0.5)) / n,
            G=lambda s: (2 * (s - 0.5)) ** (1 / n),
            K=lambda x: (x**n + 1) / 2,
        )
    return dict(
        phi=lambda s: 1 / (2 * s * s) - 1,
        A=lambda s: (4 * s + 1) / (4 * s * (2 * s + 1)),
        B=lambda s: np.log1p(3 * (s - 0.5) + 2 * (s - 0.5) ** 2) / 4,
        G=lambda s: (2 * (s - 0.5) * (s + 0.5)) ** 0.25,
        K=lambda x: np.sqrt(2 * x**4 + 1) / 2,
    )


@pytest.mark.parametrize("n,k", [(3, 1), (4, 1), (5, 1), (6, 1), (4, 2)])
def test_table_against_closed_forms(n, k):
    table = cached_table(n, k)
    cf = closed_forms(n, k)
    s = table.s_grid[1:]
    for name, vals in [("phi", table.phi_vals), ("A", table.A_vals), ("B", table.B_vals), ("G", table.G_vals)]:
        ref = cf[name](s)
        err = np.max(np.abs(vals[1:] - ref) / np.maximum(np.abs(ref), 1e-300))
        assert err <= 1e-10, name
    x = np.geomspace(1e-6, 1e6, 200)
    assert np.max(np.abs(table.K(x) / cf["K"](x) - 1)) <= 1e-10


def _cone(n, k, l):
    return ConePair.garding(n, k) if l == 0 else ConePair.custom(n, f"quotient_{k}_{l}")


# Frozen values from tools/oracle.py (mpmath at 40 digits, independent of this package).
@pytest.mark.parametrize("key", sorted(GENERIC))
def test_profile_against_frozen_oracle(key):
    cone = _cone(*key)
    table = build_table(cone)
    for s, ph, a, b, g in GENERIC[key]["profile"]:
        assert phi(cone, s) == pytest.approx(ph, rel=1e-12, abs=1e-14)
        assert A(cone, s) == pytest.approx(a, rel=1e-11)
        assert math.log(table.G(s)) - math.log((s - 0.5) / s) / cone.n == pytest.approx(b, rel=1e-10)
        assert table.G(s) == pytest.approx(g, rel=1e-10)
    for x, k_val in GENERIC[key]["K"]:
        assert table.K(x) == pytest.approx(k_val, rel=1e-10)


@pytest.mark.parametrize("pair", sorted(PRIMITIVE))
def test_primitive_against_hypergeometric(pair):
    table = cached_table(*pair)
    for X, ref in PRIMITIVE[pair]:
        assert table.F(X) == pytest.approx(ref, rel=1e-10)
    for key, ref in PRIMITIVE_INF.items():
        assert cached_table(*key).F_inf == pytest.approx(ref, rel=1e-9)


def test_phi_normalization_and_slope():
    for n in range(3, 9):
        for k in range(1, n + 1):
            cone = ConePair.garding(n, k)
            assert phi(cone, 0.5) == 1.0
            assert phi_derivative_at_half(cone) == pytest.approx(-2 * n, rel=1e-6)


def test_series_and_formula_agree_at_switch():
    for n, k in [(3, 2), (5, 3), (8, 8)]:
        assert series_switch_gap(ConePair.garding(n, k)) <= 1e-9


def test_phi_outside_domain():
    with pytest.raises(DomainError):
        phi(ConePair.garding(4, 2), 0.0)


def test_psi_values():
    cone = ConePair.garding(3, 1)
    assert psi(cone, 0.0) == pytest.approx(1.5, rel=1e-12)
    assert psi(cone, -1.0) == pytest.approx(3.5, rel=1e-10)
    assert psi(cone, 2.0) == pytest.approx(2.0 * phi(cone, 2.0), rel=1e-14)


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 2), (3, 3)])
def test_tail_exponent(n, k):
    mu = (n - k) / k
    assert asymptotic_exponent(cached_table(n, k), 1e2, 1e4) == pytest.approx(1 + mu, abs=0.05)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 1), (3, 2), (4, 2), (3, 3)]), st.floats(-12.0, 20.0))
def test_K_inverts_G(pair, log_u):
    table = cached_table(*pair)
    s = 0.5 + math.exp(log_u)
    if s > table.s_max:
        return
    assert float(table.K(table.G(s))) == pytest.approx(s, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 2), (4, 2), (5, 1)]), st.floats(-8.0, 6.0))
def test_F_inverse_round_trip(pair, log_x):
    table = cached_table(*pair)
    X = math.exp(log_x)
    assert float(table.F_inverse(table.F(X))) == pytest.approx(X, rel=1e-10)


def test_F_inf_finite_iff_mu_above_one():
    assert math.isfinite(cached_table(5, 1).F_inf)
    assert math.isinf(cached_table(4, 2).F_inf)
    assert math.isinf(cached_table(3, 2).F_inf)


def test_margins_nonnegative_and_deficit_positive():
    table = cached_table(4, 3)
    m = inequality_margins(table)
    assert m["A_lower"] >= -1e-12 and m["ratio_lower"] >= -1e-12
    assert deficit(table.cone, 0.5 + 1e-12) > 0


def test_dump_table_writes_csv_and_json(tmp_path, table_42):
    csv_path, json_path = dump_table(table_42, tmp_path / "t")
    header = csv_path.read_text().splitlines()[0]
    assert header.split(",")[:2] == ["s", "phi"]
    meta = json.loads(json_path.read_text())
    assert (meta["n"], meta["k"]) == (4, 2)


def test_G_beyond_table_raises(table_42):
    with pytest.raises(TableRangeError):
        table_42.G(2 * table_42.s_max)
