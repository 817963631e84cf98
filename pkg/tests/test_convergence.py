import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rvflow import convergence as cb
from rvflow import model_flow as mf
from rvflow.errors import MaxItersError, NotContractiveError, OutOfDomainError
from rvflow.integrators import IntegratorConfig, Method


@pytest.mark.parametrize("k,expected", [(0, 0.0), (0.25, 0.5 * math.log(3))])
def test_ahlfors_weill_examples(k, expected):
    assert cb.ahlfors_weill_bound(k) == pytest.approx(expected, abs=1e-14)


def test_ahlfors_weill_pole():
    with pytest.raises(OutOfDomainError):
        cb.ahlfors_weill_bound(0.5)
    assert cb.ahlfors_weill_bound(0.5 - 1e-12) > 13


def test_ahlfors_weill_increasing_and_convex():
    ks = np.linspace(0, 0.49, 200)
    vals = np.array([cb.ahlfors_weill_bound(k) for k in ks])
    assert np.all(np.diff(vals) > 0) and np.all(np.diff(vals, 2) > -1e-15)


@pytest.mark.parametrize("d,c,expected", [(0, 0.5, 0), (0.3, 0.5, 0.6), (1, 0.9, 10)])
def test_contraction_tail(d, c, expected):
    assert cb.contraction_tail_bound(d, c) == pytest.approx(expected)


def test_wolpert_sup_bound():
    assert cb.wolpert_sup_bound(cb.NormBudget()) == 0
    assert cb.wolpert_sup_bound(cb.NormBudget(l2_norm=0.1, max_log_length_deriv=0.2)) == pytest.approx(0.2)


def test_norm_budget_nehari_ceiling():
    with pytest.raises(ValueError):
        cb.NormBudget(sup_norm=1.6)
    with pytest.raises(ValueError):
        cb.NormBudget(l2_norm=-1)


def test_chained_example():
    cert = cb.wolpert_chain(cb.NormBudget(l2_norm=0.1), 0.5)
    assert cert.bound == pytest.approx(2 * cb.ahlfors_weill_bound(0.1))
    assert cert.bound == pytest.approx(0.4055, abs=1e-4)
    assert set(cert.to_dict()) == {"bound", "inputs", "formula_id"}


def test_chain_infinite_past_pole():
    assert math.isinf(cb.wolpert_chain(cb.NormBudget(l2_norm=0.6), 0.5).bound)


def test_chain_tends_to_zero():
    chain = [cb.wolpert_chain(cb.NormBudget(l2_norm=2.0**-k), 0.5).bound for k in range(1, 21)]
    assert math.isinf(chain[0])
    assert all(a > b for a, b in zip(chain, chain[1:])) and chain[-1] < 1e-5


def test_banach_affine_example():
    spec = cb.ContractionSpec(0.4, lambda z: 1 + 0.4 * (z - 1))
    res = cb.banach_iterate(spec, 1.9)
    assert abs(res.fixed_point - 1) <= res.certified_radius
    assert res.certified_radius < 1e-12


def test_banach_starting_at_fixed_point():
    spec = cb.ContractionSpec(0.4, lambda z: 1 + 0.4 * (z - 1))
    res = cb.banach_iterate(spec, 1.0)
    assert res.n_iters == 0 and res.fixed_point == 1 and res.certified_radius == 0


@given(st.floats(0.05, 0.95), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_banach_certificate_valid(c, p, x0):
    spec = cb.ContractionSpec(c, lambda z: p + c * (z - p))
    res = cb.banach_iterate(spec, x0, 1e-9)
    assert abs(res.fixed_point - p) <= res.certified_radius + 1e-15


def test_banach_rejects_expanding_map():
    with pytest.raises(NotContractiveError):
        cb.banach_iterate(cb.ContractionSpec(0.5, lambda z: 2 * z), 1.0)


def test_banach_max_iters():
    spec = cb.ContractionSpec(0.99, lambda z: 0.99 * z)
    with pytest.raises(MaxItersError):
        cb.banach_iterate(spec, 1e6, 1e-14, max_iters=10)


def _time_one():
    cfg = IntegratorConfig(method=Method.RK4_FIXED, dt=1e-2, t_max=1.0)
    return lambda z: mf.integrate(z, cfg).final


def _disk_sampler(radius):
    def sampler(rng):
        r = radius * np.sqrt(rng.random(2))
        return tuple((1 + r * np.exp(2j * np.pi * rng.random(2))).tolist())
    return sampler


def test_banach_on_time_one_map_near_stable_zero():
    # operator norm of the time-1 map is at most ~0.85 on |z - 1| <= 0.3
    spec = cb.ContractionSpec(0.9, _time_one())
    res = cb.banach_iterate(spec, 1.2 + 0.15j, 1e-10, sampler=_disk_sampler(0.3), n_pairs=50)
    assert abs(res.fixed_point - 1) <= res.certified_radius + 1e-12
    assert abs(res.fixed_point - 1) < 1e-9


def test_time_one_map_fails_spot_check_on_half_disk():
    # near the rim of |z - 1| <= 0.5 the time-1 map stretches by up to ~1.08,
    # so the factor that works on the smaller disk is rejected here
    spec = cb.ContractionSpec(0.9, _time_one())
    with pytest.raises(NotContractiveError):
        cb.banach_iterate(spec, 1.2, 1e-10, sampler=_disk_sampler(0.5), n_pairs=400)
