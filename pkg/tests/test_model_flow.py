import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rvflow import model_flow as mf
from rvflow.errors import NotAZeroError
from rvflow.integrators import IntegratorConfig, Method, TerminalStatus

finite = st.floats(-3, 3, allow_nan=False)
complexes = st.builds(complex, finite, finite)


def v_oracle(z):
    x, y = z.real, z.imag
    r2 = x * x + y * y
    return 0.25 * (r2 * r2 - 2 * z * (x * x - y * y) - z * z + 2 * z)


@pytest.mark.parametrize("z,expected", [(0, 0), (1, 0), (2, 0), (-1, 0), (1 + 1j, 1.5), (0.5, 0.140625)])
def test_eval_v_examples(z, expected):
    assert mf.eval_v(complex(z)) == pytest.approx(expected, abs=1e-15)


@given(complexes)
def test_eval_v_matches_transcription(z):
    assert abs(mf.eval_v(z) - v_oracle(z)) <= 1e-12 * max(1.0, abs(z) ** 4)


def test_eval_v_vectorized():
    zs = np.array([0.5, 1 + 1j, -0.3 + 2j])
    assert np.allclose(mf.eval_v(zs), [v_oracle(complex(z)) for z in zs], rtol=1e-15)


@pytest.mark.parametrize("z,dz,dzbar", [(1, -0.5, 0), (0, 0.5, 0), (2, -0.5, 2)])
def test_wirtinger_examples(z, dz, dzbar):
    a, b = mf.wirtinger_derivatives(complex(z))
    assert a == pytest.approx(dz, abs=1e-15) and b == pytest.approx(dzbar, abs=1e-15)


@given(complexes)
def test_wirtinger_against_finite_differences(z):
    h = 1e-5
    fx = (v_oracle(z + h) - v_oracle(z - h)) / (2 * h)
    fy = (v_oracle(z + 1j * h) - v_oracle(z - 1j * h)) / (2 * h)
    a, b = mf.wirtinger_derivatives(z)
    scale = max(1.0, abs(z) ** 3)
    assert abs(a - 0.5 * (fx - 1j * fy)) < 1e-7 * scale
    assert abs(b - 0.5 * (fx + 1j * fy)) < 1e-7 * scale


@given(complexes)
def test_jacobian_trace_and_det(z):
    a, b = mf.wirtinger_derivatives(z)
    jac = mf.real_jacobian(z)
    scale = max(1.0, abs(z) ** 6)
    assert np.trace(jac) == pytest.approx(2 * a.real, abs=1e-12 * scale)
    assert np.linalg.det(jac) == pytest.approx(abs(a) ** 2 - abs(b) ** 2, abs=1e-12 * scale)


@pytest.mark.parametrize("z,jac", [(2, [[1.5, 0], [0, -2.5]]), (1, [[-0.5, 0], [0, -0.5]]),
                                   (-1, [[-1.5, 0], [0, 0.5]])])
def test_real_jacobian_examples(z, jac):
    assert np.allclose(mf.real_jacobian(complex(z)), jac, atol=1e-15)


@pytest.mark.parametrize("z,kind,eigs", [(1, "STABLE", (-0.5, -0.5)), (2, "SADDLE", (1.5, -2.5)),
                                         (0, "UNSTABLE", (0.5, 0.5)), (-1, "SADDLE", (-1.5, 0.5))])
def test_classify(z, kind, eigs):
    rep = mf.classify_fixed_point(complex(z))
    assert rep.kind.value == kind
    assert sorted(w.real for w in rep.eigenvalues) == pytest.approx(sorted(eigs), abs=1e-14)
    d = json.loads(rep.to_json())
    assert d["class"] == kind and set(d) == {"location", "dz", "dzbar", "jacobian", "eigenvalues", "class"}


def test_classify_rejects_non_zero():
    with pytest.raises(NotAZeroError):
        mf.classify_fixed_point(0.5)


@pytest.mark.parametrize("box,grid,expected", [
    (mf.Box(-2, 3, -2, 2), 40, [-1, 0, 1, 2]),
    (mf.Box(0.5, 1.5, -0.5, 0.5), 10, [1]),
    (mf.Box(5, 6, 5, 6), 10, []),
])
def test_find_fixed_points(box, grid, expected):
    assert [r.location for r in mf.find_fixed_points(box, grid)] == expected


def test_find_fixed_points_records_failed_seeds():
    failures = []
    mf.find_fixed_points(mf.Box(5, 6, 5, 6), 10, failures)
    assert all(isinstance(z, complex) for z in failures)


def test_integrate_from_fixed_point_is_constant():
    traj = mf.integrate(1.0, IntegratorConfig(t_max=5.0))
    assert np.all(traj.z == 1.0)


def test_integrate_reaches_target():
    traj = mf.integrate(0.3 + 0.2j, target=1)
    assert traj.terminal_status is TerminalStatus.CONVERGED and abs(traj.final - 1) < 1e-6


def test_orbit_on_circle_stays_and_goes_to_two():
    # 2 is a saddle: past t ~ 10 rounding error grows along the real axis
    cfg = IntegratorConfig(method=Method.RK4_FIXED, dt=1e-3, t_max=8.0)
    traj = mf.integrate(1 + np.exp(0.1j), cfg)
    assert np.max(np.abs(np.abs(traj.z - 1) - 1)) < 1e-6
    assert abs(traj.final - 2) < 1e-6


@pytest.mark.parametrize("theta,expected", [(math.pi / 2, 1.5), (0.0, 0.0), (math.pi, 0.0)])
def test_circle_decompose_examples(theta, expected):
    radial, horiz = mf.circle_decompose(theta)
    assert abs(radial) < 1e-12 and horiz == pytest.approx(expected, abs=1e-12)


def test_horizontal_symbolic_form():
    theta = np.linspace(0, 2 * np.pi, 1000)
    _, horiz = mf.circle_decompose(theta)
    assert np.max(np.abs(horiz - mf.horizontal_closed_form(theta))) < 1e-12
    # the quoted (3/4) sin^2 (2 + cos) agrees only where cos vanishes
    stated = 0.75 * np.sin(theta) ** 2 * (2 + np.cos(theta))
    assert np.allclose(horiz - stated, np.sin(theta) ** 2 * np.cos(theta) / 4, atol=1e-12)


def test_basin_sample_labels():
    grid = mf.GridSpec(mf.Box(0, 2, -1, 1), 9, 9)
    raster = mf.basin_sample(grid)
    for j, y in enumerate(raster.im):
        for i, x in enumerate(raster.re):
            z = complex(x, y)
            if abs(z - 1) <= 0.9:
                assert raster.labels[j][i] == "1"
            elif abs(z - 1) >= 1.1:
                assert raster.labels[j][i] != "1"
    assert raster.labels[4][4] == "1"  # z = 1 exactly


def test_basin_sample_csv_and_workers():
    grid = mf.GridSpec(mf.Box(0.5, 1.5, -0.5, 0.5), 3, 2)
    a = mf.basin_sample(grid)
    b = mf.basin_sample(grid, workers=2)
    assert a.to_csv() == b.to_csv()
    lines = a.to_csv().splitlines()
    assert lines[0] == "re,im,label" and len(lines) == 7


def test_basin_sample_needs_two_points_per_axis():
    with pytest.raises(ValueError):
        mf.basin_sample(mf.GridSpec(mf.Box(0, 1, 0, 1), 1, 5))


def test_zero_noise_is_bit_identical():
    cfg = IntegratorConfig(t_max=20.0)
    a = mf.integrate(1.2 + 0.1j, cfg)
    b = mf.perturbed_integrate(1.2 + 0.1j, lambda t: 0.0, rng_seed=3, cfg=cfg)
    assert np.array_equal(a.t, b.t) and np.array_equal(a.z, b.z)


def test_perturbed_flow_is_seed_reproducible():
    cfg = IntegratorConfig(t_max=10.0)
    a = mf.perturbed_integrate(0.7, lambda t: math.exp(-t), 5, cfg)
    b = mf.perturbed_integrate(0.7, lambda t: math.exp(-t), 5, cfg)
    c = mf.perturbed_integrate(0.7, lambda t: math.exp(-t), 6, cfg)
    assert a.to_csv() == b.to_csv() != c.to_csv()


def test_perturbed_flow_rejects_increasing_amplitude():
    with pytest.raises(ValueError):
        mf.perturbed_integrate(0.7, lambda t: t, 0)


@pytest.mark.parametrize("z0,seed,tol", [(1.2 + 0.1j, 0, 1e-4), (1.2 + 0.1j, 11, 1e-4), (1.0, 7, 1e-3)])
def test_tail_accumulation(z0, seed, tol):
    traj = mf.perturbed_integrate(z0, lambda t: math.exp(-t), seed, IntegratorConfig(t_max=60.0))
    mean, diam = mf.tail_accumulation(traj)
    assert diam < tol and abs(mean - 1) < tol


def test_unit_disk_noise():
    u = mf.unit_disk_noise(0, 5000)
    assert np.all(np.abs(u) <= 1) and np.array_equal(u, mf.unit_disk_noise(0, 5000))


def test_portrait_svg_is_well_formed():
    svg = mf.portrait_svg(mf.GridSpec(mf.Box(-0.5, 2.5, -1.5, 1.5), 12, 10))
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert svg.count("<line") >= 100


def test_portrait_single_arrow():
    svg = mf.portrait_svg(mf.GridSpec(mf.Box(0.2, 0.4, 0.2, 0.4), 1, 1))
    ET.fromstring(svg)
    assert svg.count("<line") == 1
