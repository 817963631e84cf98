import cmath
import math

import pytest

from rvflow.integrators import (IntegratorConfig, Method, TerminalStatus, dopri5_step, rk4_step,
                                solve)


def linear(t, z):
    return (-0.5 + 2j) * z


def test_rk4_fourth_order_on_linear_ode():
    lam = -0.5 + 2j
    errs = []
    for h in (0.1, 0.05):
        z, t = 1 + 0j, 0.0
        for _ in range(round(1 / h)):
            z = rk4_step(linear, t, z, h)
            t += h
        errs.append(abs(z - cmath.exp(lam)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4, abs=0.2)


def test_dopri5_step_accuracy():
    z1, err, _ = dopri5_step(linear, 0.0, 1 + 0j, 0.01, linear(0.0, 1 + 0j))
    assert abs(err) < 1e-10
    assert abs(z1 - cmath.exp((-0.5 + 2j) * 0.01)) < 1e-13


def test_adaptive_solve_reaches_t_max():
    cfg = IntegratorConfig(t_max=3.0, abs_tol=1e-11, rel_tol=1e-11)
    traj = solve(linear, 1 + 0j, cfg)
    assert traj.terminal_status is TerminalStatus.MAX_TIME
    assert traj.t[-1] == pytest.approx(3.0)
    assert abs(traj.final - cmath.exp((-0.5 + 2j) * 3)) < 1e-9


def test_target_and_divergence():
    cfg = IntegratorConfig(t_max=100.0)
    conv = solve(lambda t, z: -(z - 2), 0j, cfg, targets=(5, 2))
    assert conv.terminal_status is TerminalStatus.CONVERGED and conv.target_index == 1
    div = solve(lambda t, z: z * z, 1 + 0j, cfg)
    assert div.terminal_status is TerminalStatus.DIVERGED


def test_fixed_step_mode_uses_dt():
    cfg = IntegratorConfig(method=Method.RK4_FIXED, dt=0.25, t_max=1.0)
    traj = solve(linear, 1 + 0j, cfg)
    assert len(traj.t) == 5
    assert traj.integrator_id == cfg.integrator_id


@pytest.mark.parametrize("field", ["dt", "abs_tol", "rel_tol", "t_max", "convergence_radius"])
def test_config_rejects_nonpositive(field):
    with pytest.raises(ValueError):
        IntegratorConfig(**{field: 0.0})


def test_csv_round_trip():
    traj = solve(linear, 1 + 0j, IntegratorConfig(t_max=0.5))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,re,im"
    assert len(lines) == len(traj.t) + 1
    t, re, im = map(float, lines[-1].split(","))
    assert complex(re, im) == traj.final and t == traj.t[-1]
