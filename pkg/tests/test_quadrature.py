import math

import numpy as np
import pytest

from halfspace_ln.exceptions import QuadratureError
from halfspace_ln.quadrature import _NODES, adaptive_panels, gauss_legendre, gk15


def test_gk15_exact_for_polynomials():
    for deg in range(0, 23):
        val, _ = gk15(lambda x: x**deg, 0.0, 1.0)
        assert val == pytest.approx(1.0 / (deg + 1), rel=1e-14)
    assert _NODES.size == 15


def test_adaptive_handles_endpoint_singularity():
    val, err = adaptive_panels(np.sqrt, 0.0, 1.0, rtol=1e-12)
    assert float(np.squeeze(val)) == pytest.approx(2.0 / 3.0, rel=1e-11)


def test_adaptive_vectorized_panels():
    a = np.array([0.0, 1.0])
    b = np.array([1.0, 2.0])
    vals, _ = adaptive_panels(np.exp, a, b, rtol=1e-12)
    assert np.allclose(vals, [math.e - 1, math.e**2 - math.e], rtol=1e-13)


def test_adaptive_reports_failure():
    with pytest.raises(QuadratureError):
        adaptive_panels(lambda x: 1.0 / x, 0.0, 1.0, rtol=1e-12, max_depth=5)


def test_gauss_legendre():
    assert gauss_legendre(np.cos, 0.0, math.pi / 2) == pytest.approx(1.0, rel=1e-15)
