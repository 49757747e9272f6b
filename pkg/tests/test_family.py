import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cached_table
from halfspace_ln.exceptions import HorizonError, NotApplicableError, ParameterError
from halfspace_ln.family import (
    build_family,
    envelope_constant,
    gamma,
    incompleteness_integral,
    shoot_b,
    shooting_curve,
    verify_theorem_B,
)

T_GRID = np.unique(np.concatenate([np.geomspace(1e-6, 0.1, 30), np.linspace(0.1, 20.0, 80)]))


def test_gamma_against_scipy(table_42):
    from scipy.integrate import quad

    b = 1.0
    ref = quad(lambda s: 1 / math.sqrt(2 * float(table_42.K(b * s))), 0.0, 2.0, epsabs=0, epsrel=1e-12)[0]
    assert gamma(table_42, b, 0.0, 2.0) == pytest.approx(ref, rel=1e-10)


def test_shoot_hits_the_target(table_42):
    for a in (1.5, 3.0, 10.0):
        b = shoot_b(table_42, a, 0.0)
        assert gamma(table_42, b, 0.0, a) == pytest.approx(1.0, abs=1e-10)


def test_shooting_curve_properties():
    for pair in [(4, 2), (3, 3)]:
        checks = shooting_curve(cached_table(*pair), 3.0).checks()
        assert all(checks.values()), checks


@pytest.mark.parametrize("pair", [(4, 2), (3, 2), (3, 3)])
def test_family_properties(pair):
    table = cached_table(*pair)
    sols = [build_family(table, a) for a in (0.0, 0.5, 1.0, 2.0)]
    report = verify_theorem_B(sols, T_GRID)
    assert report.passed, [c.__dict__ for c in report.failures()]


def test_family_value_at_one_and_boundary(table_42):
    sol = build_family(table_42, 1.0)
    assert float(sol.w(1.0)) == pytest.approx(2.0, abs=1e-10)
    assert float(sol.w(0.0)) == 0.0
    assert float(sol.excess(1e-6)) > 0
    assert float(sol.w_prime(1.0)) == pytest.approx(float(sol.w_prime_from_inverse(1.0)), rel=1e-8)


def test_incompleteness_integral_finite(table_42):
    info = incompleteness_integral(build_family(table_42, 1.0))
    assert info["finite"] and info["tail_check"] <= 1e-6


def test_mu_above_one_family_is_local():
    table = cached_table(3, 1)
    sol = build_family(table, 1.0)
    assert not sol.is_global and math.isfinite(sol.horizon)
    with pytest.raises(HorizonError):
        sol.w(sol.horizon * 1.01)
    with pytest.raises(NotApplicableError):
        verify_theorem_B([sol], T_GRID)


def test_negative_a_rejected(table_42):
    with pytest.raises(ParameterError):
        build_family(table_42, -0.5)


def test_envelope_constant_is_a_lower_bound(table_42):
    C = envelope_constant(table_42)
    x = np.geomspace(1e-6, 1e6, 2000)
    assert np.all(table_42.K(x) >= C * np.sqrt(x))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 50.0), st.floats(0.1, 5.0), st.floats(0.01, 4.0))
def test_gamma_increasing_in_b(b, delta, gap):
    table = cached_table(4, 2)
    a = delta + gap
    assert gamma(table, b * 1.5, delta, a) < gamma(table, b, delta, a)


# (a, b, w(0.1), w'(0.1)) for (4, 2) from the closed form
# F(X) = X 2F1(1/4, 1/4; 5/4; -2 X^4), evaluated with mpmath at 30 digits.
BLOWUP_ROWS = [
    (1.0, 2.133053314851018, 0.10002069341526187, 1.0010343381377869),
    (10.0, 4.1200648627846705, 0.10028655715848452, 1.014265119523046),
    (100.0, 6.348019207289574, 0.10157642708415783, 1.0770617754569252),
    (1000.0, 8.524639341614032, 0.10484735010895709, 1.2283126737672845),
]


def test_blowup_table_against_closed_form(table_42):
    from halfspace_ln.family import theorem_D_table

    result = theorem_D_table(table_42, 0.1, [r[0] for r in BLOWUP_ROWS])
    ref = np.array(BLOWUP_ROWS)
    assert np.allclose(result.b, ref[:, 1], rtol=1e-9, atol=0)
    assert np.allclose(result.w_eps, ref[:, 2], rtol=1e-9, atol=0)
    assert np.allclose(result.wprime_eps, ref[:, 3], rtol=1e-9, atol=0)
    assert np.all(result.bound_ok)
