"""Explicit Runge-Kutta integrators for scalar complex ODEs z' = f(t, z).

Two schemes are provided: classical fixed-step RK4 and the Dormand-Prince
5(4) embedded pair with standard step-size control. Both are written for a
single complex state, where plain Python arithmetic beats array overhead.

References
----------
Dormand, J. R.; Prince, P. J. (1980). "A family of embedded Runge-Kutta
formulae".
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

ComplexField = Callable[[float, complex], complex]


class Method(str, enum.Enum):
    RK4_FIXED = "RK4_FIXED"
    RK45_ADAPTIVE = "RK45_ADAPTIVE"


class TerminalStatus(str, enum.Enum):
    CONVERGED = "CONVERGED"
    MAX_TIME = "MAX_TIME"
    DIVERGED = "DIVERGED"


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings; defaults are the adaptive scheme at 1e-9."""

    method: Method = Method.RK45_ADAPTIVE
    dt: float = 1e-2
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    t_max: float = 200.0
    convergence_radius: float = 1e-7
    divergence_radius: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        for name in ("dt", "abs_tol", "rel_tol", "t_max", "convergence_radius", "divergence_radius"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be a positive finite number, got {val!r}")

    @property
    def integrator_id(self) -> str:
        if self.method is Method.RK4_FIXED:
            return f"rk4(dt={self.dt!r})"
        return f"dopri5(atol={self.abs_tol!r},rtol={self.rel_tol!r})"

    def as_dict(self) -> dict:
        return {
            "method": self.method.value,
            "dt": self.dt,
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "t_max": self.t_max,
            "convergence_radius": self.convergence_radius,
            "divergence_radius": self.divergence_radius,
        }


@dataclass
class Trajectory:
    t: np.ndarray
    z: np.ndarray
    integrator_id: str
    step_stats: tuple[float, float, int]
    terminal_status: TerminalStatus
    target_index: Optional[int] = field(default=None, repr=False)

    @property
    def samples(self) -> list[tuple[float, complex]]:
        return list(zip(self.t.tolist(), self.z.tolist()))

    @property
    def final(self) -> complex:
        return complex(self.z[-1])

    def to_csv(self) -> str:
        """Serialize as ``t,re,im`` rows with 17 significant digits."""
        lines = ["t,re,im"]
        for t, z in zip(self.t.tolist(), self.z.tolist()):
            lines.append(f"{t:.17g},{z.real:.17g},{z.imag:.17g}")
        return "\n".join(lines) + "\n"


def rk4_step(f: ComplexField, t: float, z: complex, h: float) -> complex:
    k1 = f(t, z)
    k2 = f(t + 0.5 * h, z + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, z + 0.5 * h * k2)
    k4 = f(t + h, z + h * k3)
    return z + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between 5th and embedded 4th order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


def dopri5_step(f: ComplexField, t: float, z: complex, h: float, k1: complex):
    """One Dormand-Prince step. Returns (z_new, error_estimate, k7)."""
    k2 = f(t + _C2 * h, z + h * _A21 * k1)
    k3 = f(t + _C3 * h, z + h * (_A31 * k1 + _A32 * k2))
    k4 = f(t + _C4 * h, z + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
    k5 = f(t + _C5 * h, z + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
    k6 = f(t + h, z + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
    z_new = z + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
    k7 = f(t + h, z_new)
    err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
    return z_new, err, k7


def solve(
    f: ComplexField,
    z0: complex,
    cfg: IntegratorConfig,
    targets: Sequence[complex] = (),
) -> Trajectory:
    """Integrate from t = 0 until t_max, divergence, or arrival at a target.

    Arrival means ``|z - target| < cfg.convergence_radius`` for one of the
    ``targets``; the index of the target reached is stored on the result.
    """
    z = complex(z0)
    ts = [0.0]
    zs = [z]
    t = 0.0
    h_min = math.inf
    h_max = 0.0
    n_steps = 0

    def check(zv: complex):
        if not (math.isfinite(zv.real) and math.isfinite(zv.imag)) or abs(zv) > cfg.divergence_radius:
            return TerminalStatus.DIVERGED, None
        for i, tgt in enumerate(targets):
            if abs(zv - tgt) < cfg.convergence_radius:
                return TerminalStatus.CONVERGED, i
        return None, None

    status, hit = check(z)
    if status is not None:
        return Trajectory(np.array(ts), np.array(zs, dtype=complex), cfg.integrator_id,
                          (0.0, 0.0, 0), status, hit)

    if cfg.method is Method.RK4_FIXED:
        n_total = int(math.ceil(cfg.t_max / cfg.dt - 1e-9))
        for i in range(1, n_total + 1):
            t_next = min(i * cfg.dt, cfg.t_max)
            h = t_next - t
            z = rk4_step(f, t, z, h)
            t = t_next
            n_steps += 1
            h_min = min(h_min, h)
            h_max = max(h_max, h)
            ts.append(t)
            zs.append(z)
            status, hit = check(z)
            if status is not None:
                break
    else:
        h = min(cfg.dt, cfg.t_max)
        k1 = f(t, z)
        while t < cfg.t_max:
            h = min(h, cfg.t_max - t)
            z_new, err_vec, k7 = dopri5_step(f, t, z, h, k1)
            scale = cfg.abs_tol + cfg.rel_tol * max(abs(z), abs(z_new))
            err = abs(err_vec) / scale
            if not math.isfinite(err):
                err = math.inf
            if err <= 1.0:
                t = t + h if t + h < cfg.t_max else cfg.t_max
                z = z_new
                k1 = k7
                n_steps += 1
                h_min = min(h_min, h)
                h_max = max(h_max, h)
                ts.append(t)
                zs.append(z)
                status, hit = check(z)
                if status is not None:
                    break
                factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            else:
                factor = max(0.2, 0.9 * err ** -0.2) if math.isfinite(err) else 0.2
                if h * factor < 1e-14 * max(1.0, t):
                    # step size underflow: treat as blow-up
                    status = TerminalStatus.DIVERGED
                    break
            h = h * factor

    if status is None:
        status = TerminalStatus.MAX_TIME
    if n_steps == 0:
        h_min = 0.0
    return Trajectory(np.array(ts), np.array(zs, dtype=complex), cfg.integrator_id,
                      (h_min, h_max, n_steps), status, hit)
