import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfspace_ln.barriers import (
    BallProfile,
    BarrierSpec,
    HalfspaceProfile,
    annulus_margins,
    certify_annulus_supersolution,
    counterexample_witness,
    equation_residual,
    radial_eigenvalues,
)
from halfspace_ln.cones import ConePair
from halfspace_ln.exceptions import DomainError, NotApplicableError
from halfspace_ln.family import build_family
from conftest import cached_table

CONE = ConePair.garding(4, 2)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 1e3), st.floats(0.001, 0.999))
def test_ball_profile_is_exactly_half(R, frac):
    lam1, lam2 = radial_eigenvalues(BallProfile(R), np.array([frac * R]))
    assert abs(lam1[0] - 0.5) <= 1e-14 and abs(lam2[0] - 0.5) <= 1e-14


def test_radial_eigenvalues_domain():
    with pytest.raises(DomainError):
        radial_eigenvalues(BallProfile(1.0), np.array([2.0]))


def test_feasible_annulus_certifies():
    cert = certify_annulus_supersolution(CONE, BarrierSpec.annulus(201.0, 10.0, 37.5))
    assert cert.passed
    assert cert.margins["C_lower"] == pytest.approx(37.5 - 9 * 201**2 / 1e4, rel=1e-14)
    assert cert.margins["C_upper"] == pytest.approx(201**3 / 21e4 - 37.5, rel=1e-14)
    assert cert.grid["d"].size == 10_000


@pytest.mark.parametrize("C", [30.0, 39.0])
def test_infeasible_annulus_rejected(C):
    spec = BarrierSpec.annulus(201.0, 10.0, C)
    cert = certify_annulus_supersolution(CONE, spec)
    assert not cert.passed and not cert.feasible
    m = annulus_margins(spec)
    assert min(m["C_lower"], m["C_upper"]) < 0


def test_linear_profile_solves_the_equation():
    res = equation_residual(CONE, HalfspaceProfile.linear(1.0), np.array([0.5, 1.0, 3.0]))
    assert np.max(np.abs(res)) <= 1e-14


def test_family_member_solves_the_equation(table_42):
    res = equation_residual(CONE, build_family(table_42, 1.0), np.array([0.25, 0.5, 1.0]))
    assert np.max(np.abs(res)) <= 1e-8


def test_counterexample_witness(table_42):
    wit = counterexample_witness(table_42, 1.0)
    assert wit is not None and wit.barrier_value < wit.u_value
    assert wit.recompute() == wit.barrier_value
    assert counterexample_witness(table_42, 0.0) is None
    with pytest.raises(NotApplicableError):
        counterexample_witness(cached_table(3, 1), 1.0)
