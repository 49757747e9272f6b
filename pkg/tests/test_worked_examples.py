"""Small worked examples with hand-derived or closed-form answers."""

import json
import math

import numpy as np
import pytest
from scipy import integrate, optimize

from conftest import cached_table
from halfspace_ln.barriers import (
    AnnulusProfile,
    HalfspaceProfile,
    equation_residual,
    exterior_barrier_value,
    halfspace_eigenvalues,
    radial_eigenvalues,
)
from halfspace_ln.cli import main
from halfspace_ln.cones import ConePair, check_concave_ray, contains, eta, eval_f, mu_minus, mu_plus
from halfspace_ln.family import (
    build_family,
    gamma,
    global_existence_horizon,
    shoot_b,
    theorem_D_table,
)
from halfspace_ln.ivp import IvpSpec, b_of, max_time, solve_ivp
from halfspace_ln.profile import A, asymptotic_exponent, phi_derivative_at_half, phi_taylor, psi

G42 = ConePair.garding(4, 2)


# cones

@pytest.mark.parametrize("t", [0.0, 0.5, 3.0, 10.0])
def test_ray_values(t):
    assert eval_f(ConePair.garding(3, 1), [t, 1, 1]) == pytest.approx((t + 2) / 3, rel=1e-14)
    assert eval_f(G42, [t, 1, 1, 1]) == pytest.approx(math.sqrt((t + 1) / 2), rel=1e-14)


def test_membership_examples():
    assert not contains(G42, [-1, 1, 1, 1])
    assert contains(ConePair.garding(3, 1), [1, 0, 0])
    assert not contains(ConePair.garding(3, 2), [1, 0, 0])
    assert all(contains(ConePair.garding(n, k), np.ones(n)) for n in range(3, 7) for k in range(1, n + 1))


def test_scalar_invariant_examples():
    assert mu_plus(ConePair.garding(3, 3)) == 0.0
    assert mu_plus(ConePair.garding(3, 1)) == 2.0
    assert math.isinf(eta(ConePair.garding(3, 1))) and math.isinf(eta(G42))
    assert mu_minus(G42) is None


def test_concave_ray_examples():
    report = check_concave_ray(ConePair.garding(3, 1), np.linspace(-1.9, 50, 200))
    assert report.ok and abs(report.worst_margin) <= 1e-13
    assert check_concave_ray(G42, [1.0]).worst_margin == pytest.approx(0.0, abs=1e-15)
    assert check_concave_ray(G42, [3.0]).worst_margin == pytest.approx(1.5 - math.sqrt(2), rel=1e-14)


# profile

def test_slope_and_second_derivative_at_half():
    assert phi_derivative_at_half(ConePair.garding(10, 4)) == -20.0
    c = phi_taylor(G42)
    assert c[1] == pytest.approx(-8.0, rel=1e-12)
    assert 2 * c[2] == pytest.approx(48.0, rel=1e-10)
    assert A(G42, 0.5) == pytest.approx(0.75, rel=1e-12)
    assert A(ConePair.garding(3, 1), 7.0) == pytest.approx(1 / 21, rel=1e-13)


def test_table_endpoints(table_42):
    assert table_42.G(0.5) == 0.0
    assert table_42.K(0.0) == 0.5
    assert psi(G42, 0.5) == 0.5


def test_zero_mu_tail_exponent():
    assert asymptotic_exponent(cached_table(3, 3), 1e2, 1e4) == pytest.approx(1.0, abs=0.05)


# ivp

def test_first_integral_constants(table_42):
    assert b_of(table_42, 0.7, 1.0) == 0.0
    assert b_of(cached_table(3, 1), 1.0, 2.0) == pytest.approx(3 ** (1 / 3), rel=1e-12)
    assert b_of(table_42, 2.0, 2.0) == pytest.approx(7.5**0.25 / 2, rel=1e-12)


def test_convex_trajectory_reaches_horizon(table_42):
    traj = solve_ivp(table_42, IvpSpec(1.0, 2.0, 0.0, 5.0), t_eval=np.linspace(0, 5, 101))
    assert traj.status == "reached_horizon"
    assert np.all(traj.w_double_prime >= 0) and np.all(np.diff(traj.w_prime) > 0)


def test_infinite_max_time_for_small_mu(table_42):
    assert math.isinf(max_time(table_42, 1.0, 3.0))
    assert math.isinf(max_time(cached_table(3, 2), 0.5, 1.5))


# family

def test_gamma_examples(table_42):
    assert gamma(table_42, 0.0, 0.3, 2.0) == pytest.approx(1.7, rel=1e-14)
    ref = integrate.quad(lambda s: (1 + 2 * s**4) ** -0.25, 0, 2, epsabs=0, epsrel=1e-13)[0]
    assert gamma(table_42, 1.0, 0.0, 2.0) == pytest.approx(ref, rel=1e-10)
    assert gamma(table_42, 1e6, 0.0, 2.0) < 1e-2


def test_shooting_examples(table_42):
    assert shoot_b(table_42, 2.0, 1.0) == 0.0
    bs = [shoot_b(table_42, 2.0, d) for d in (0.5, 0.25, 0.1, 0.0)]
    assert np.all(np.diff(bs) > 0)

    def residual(b):
        return integrate.quad(lambda s: (1 + 2 * (b * s) ** 4) ** -0.25, 0, 2, epsabs=0, epsrel=1e-13)[0] - 1

    assert bs[-1] == pytest.approx(optimize.brentq(residual, 0.1, 10, xtol=1e-14), rel=1e-9)


def test_family_examples(table_42):
    sol = build_family(table_42, 1.0)
    assert sol.is_global and float(sol.w(10.0)) > 10.0
    t = np.array([0.01, 0.5, 1.0, 3.0])
    assert np.allclose(sol.w_prime_from_inverse(t), np.sqrt(2 * table_42.K(sol.b * sol.w(t))), rtol=1e-8)
    local = build_family(cached_table(3, 1), 1.0)
    assert not local.is_global and local.horizon > 1.0


def test_horizon_examples(table_42):
    ref = integrate.quad(lambda s: (1 + s**3) ** -0.5, 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert global_existence_horizon(cached_table(3, 1), 1.0) == pytest.approx(ref, rel=1e-9)
    assert math.isinf(global_existence_horizon(table_42, 3.0))


def test_zero_mu_blowup_pattern():
    result = theorem_D_table(cached_table(3, 3), 0.5, [1.0, 10.0, 100.0])
    assert all(result.increasing.values())


# barriers

def test_halfspace_eigenvalue_examples():
    assert halfspace_eigenvalues(HalfspaceProfile.linear(1.0), 0.7) == (0.5, 0.5)
    assert halfspace_eigenvalues(HalfspaceProfile.linear(2.0), 0.7) == (2.0, 2.0)
    assert equation_residual(G42, HalfspaceProfile.linear(2.0), [0.7])[0] == pytest.approx(1.5, rel=1e-14)


def test_annulus_inner_edge():
    r = math.sqrt(201.0**2 - 100.0)
    lam1, lam2 = radial_eigenvalues(AnnulusProfile(r, 37.5), np.array([r]))
    assert lam1[0] == 0.5 and lam2[0] == 0.5


def test_family_member_residual_at_one(table_42):
    assert abs(equation_residual(G42, build_family(table_42, 1.0), [1.0])[0]) <= 1e-7


def test_exterior_barrier_decreases_along_schedule():
    b = 2.0 ** np.arange(1, 21)
    values = [exterior_barrier_value([0, 0, 1.0], [0, 0, -bb], bb - 1 / bb) for bb in b]
    assert np.all(np.diff(values) < 0) and values[-1] == pytest.approx(1.0, abs=1e-5)
    assert min(v for v in values if v <= 1.01) < 1.5


# cli

def test_cli_examples(tmp_path):
    assert main(["invariants", "--cone", '{"n":3,"kind":"garding","k":1}', "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "invariants.json").read_text())["invariants"]["dom_psi"]["kind"] == "full_line"
    assert main(["family", "--cone", '{"n":4,"kind":"garding","k":2}', "--a", "0", "--out", str(tmp_path)]) == 0
    rows = np.genfromtxt(tmp_path / "family.csv", delimiter=",", names=True)
    assert np.array_equal(rows["w"], rows["t"])
    assert main(["solve", "--cone", '{"n":3,"kind":"garding","k":1}', "--delta", "1", "--p", "2",
                 "--out", str(tmp_path)]) == 0
    traj = json.loads((tmp_path / "trajectory.json").read_text())
    assert traj["status"] == "blowup" and traj["checks"]["blowup_time_rel_error"] <= 1e-6
