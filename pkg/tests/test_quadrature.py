import math

import numpy as np
import pytest

from rvflow.errors import QuadratureNotConvergedError
from rvflow.quadrature import QuadConfig, integrate_1d, integrate_2d, pairwise_sum


def test_pairwise_sum_matches_fsum(rng):
    xs = rng.standard_normal(10_001) * 1e3
    assert pairwise_sum(xs.tolist()) == pytest.approx(math.fsum(xs), rel=1e-14)
    assert pairwise_sum([]) == 0


def test_gauss_legendre_exact_on_polynomials():
    res = integrate_1d(lambda x: 7 * x**9 - 3 * x**2 + 1, -1.0, 2.0, QuadConfig(order=5))
    exact = 0.7 * (2**10 - 1) - (8 + 1) + 3
    assert res.value == pytest.approx(exact, rel=1e-14)


def test_1d_smooth_and_breakpoints():
    res = integrate_1d(np.exp, 0.0, 3.0)
    assert res.value == pytest.approx(math.e**3 - 1, rel=1e-13)
    kink = integrate_1d(lambda x: np.abs(x - 0.3), 0.0, 1.0, breakpoints=(0.3,))
    assert kink.value == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-14)


def test_2d_separable():
    res = integrate_2d(lambda x, y: np.sin(x) * np.exp(y), (0, math.pi), (0, 1))
    assert res.value == pytest.approx(2 * (math.e - 1), rel=1e-13)
    assert res.est_error < 1e-10 and res.n_evals > 0


def test_complex_integrand():
    res = integrate_1d(lambda x: np.exp(1j * x), 0.0, math.pi)
    assert res.value == pytest.approx(2j, abs=1e-13)


def test_nonconvergence_raises():
    cfg = QuadConfig(order=4, rel_tol=1e-14, abs_tol=1e-16, max_depth=4, max_panels=50)
    with pytest.raises(QuadratureNotConvergedError):
        integrate_1d(lambda x: 1 / np.sqrt(x), 0.0, 1.0, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadConfig(order=1)
    with pytest.raises(ValueError):
        QuadConfig(rel_tol=0)
