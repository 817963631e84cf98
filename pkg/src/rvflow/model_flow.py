"""The limiting model vector field v on the complex plane.

    v(z) = (|z|^4 - 2 z Re(z^2) - z^2 + 2z) / 4

Its zeros are -1, 0, 1, 2. The closed disk |z - 1| <= 1 is forward
invariant: the boundary circle is made of two orbits running from the
repelling node 0 to the saddle 2, and the interior is the basin of the
attracting node 1.
"""
from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NotAZeroError, as_complex
from .integrators import (
    IntegratorConfig,
    Method,
    TerminalStatus,
    Trajectory,
    solve,
)

ZEROS: tuple[complex, ...] = (-1 + 0j, 0j, 1 + 0j, 2 + 0j)

# Newton de-duplication and snapping radii
DEDUP_RADIUS = 1e-8
SNAP_RADIUS = 1e-6
# |Re(eigenvalue)| below this is treated as zero
HYPERBOLIC_THRESHOLD = 1e-9


class FixedPointClass(str, enum.Enum):
    STABLE = "STABLE"
    UNSTABLE = "UNSTABLE"
    SADDLE = "SADDLE"
    NONHYPERBOLIC = "NONHYPERBOLIC"


@dataclass(frozen=True)
class FixedPointReport:
    location: complex
    dz: complex
    dzbar: complex
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    kind: FixedPointClass

    def to_dict(self) -> dict:
        def c(w):
            return {"re": float(w.real), "im": float(w.imag)}

        return {
            "location": c(self.location),
            "dz": c(self.dz),
            "dzbar": c(self.dzbar),
            "jacobian": [[float(x) for x in row] for row in self.jacobian],
            "eigenvalues": [c(w) for w in self.eigenvalues],
            "class": self.kind.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Box:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min <= self.re_max and self.im_min <= self.im_max):
            raise ValueError(f"degenerate box {self}")

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return (self.re_min - slack <= z.real <= self.re_max + slack
                and self.im_min - slack <= z.imag <= self.im_max + slack)


def eval_v(z):
    """Evaluate v at a complex scalar or array (vectorized)."""
    z2 = z * z
    r2 = (z * np.conj(z)).real
    return 0.25 * (r2 * r2 - 2.0 * z * z2.real - z2 + 2.0 * z)


def wirtinger_derivatives(z) -> tuple[complex, complex]:
    """Return (dv/dz, dv/dzbar)."""
    zb = np.conj(z)
    dz = 0.25 * (2.0 * z * zb * zb - 3.0 * z * z - zb * zb - 2.0 * z + 2.0)
    dzbar = 0.25 * (2.0 * z * z * zb - 2.0 * z * zb)
    return dz, dzbar


def realify(a: complex, b: complex) -> np.ndarray:
    """Matrix of the real-linear map delta -> a*delta + b*conj(delta)."""
    return np.array([
        [a.real + b.real, -a.imag + b.imag],
        [a.imag + b.imag, a.real - b.real],
    ])


def real_jacobian(z) -> np.ndarray:
    a, b = wirtinger_derivatives(complex(z))
    return realify(a, b)


def _classify(eigs) -> FixedPointClass:
    re = [e.real for e in eigs]
    if any(abs(r) < HYPERBOLIC_THRESHOLD for r in re):
        return FixedPointClass.NONHYPERBOLIC
    if all(r < 0 for r in re):
        return FixedPointClass.STABLE
    if all(r > 0 for r in re):
        return FixedPointClass.UNSTABLE
    return FixedPointClass.SADDLE


def classify_fixed_point(z) -> FixedPointReport:
    """Linearize v at a zero and classify it by eigenvalue signs."""
    z = as_complex(z)
    if abs(eval_v(z)) >= 1e-8:
        raise NotAZeroError(f"|v({z})| = {abs(eval_v(z)):.3g} is not below 1e-8")
    dz, dzbar = wirtinger_derivatives(z)
    jac = realify(dz, dzbar)
    ev = np.linalg.eigvals(jac)
    eigs = tuple(sorted((complex(e) for e in ev), key=lambda w: (-w.real, w.imag)))
    return FixedPointReport(z, complex(dz), complex(dzbar), jac, eigs, _classify(eigs))


def _newton(z: complex, max_iter: int = 60) -> Optional[complex]:
    for _ in range(max_iter):
        val = complex(eval_v(z))
        if abs(val) < 1e-15:
            return z
        jac = real_jacobian(z)
        try:
            step = np.linalg.solve(jac, [val.real, val.imag])
        except np.linalg.LinAlgError:
            return None
        z = z - complex(step[0], step[1])
        if not (math.isfinite(z.real) and math.isfinite(z.imag)) or abs(z) > 1e6:
            return None
        if math.hypot(step[0], step[1]) < 1e-14 * max(1.0, abs(z)):
            return z if abs(eval_v(z)) < 1e-12 else None
    return None


def find_fixed_points(
    box: Box,
    grid_n: int = 40,
    failures: Optional[list] = None,
) -> list[FixedPointReport]:
    """Newton search for zeros of v seeded on a ``grid_n`` x ``grid_n`` grid.

    Seeds whose Newton iteration fails are appended to ``failures`` when a
    list is supplied; they never abort the search.
    """
    if grid_n < 8:
        raise ValueError("grid_n must be >= 8")
    found: list[complex] = []
    for x in np.linspace(box.re_min, box.re_max, grid_n):
        for y in np.linspace(box.im_min, box.im_max, grid_n):
            seed = complex(x, y)
            root = _newton(seed)
            if root is None:
                if failures is not None:
                    failures.append(seed)
                continue
            for exact in ZEROS:
                if abs(root - exact) < SNAP_RADIUS:
                    root = exact
                    break
            if not box.contains(root):
                continue
            if all(abs(root - r) > DEDUP_RADIUS for r in found):
                found.append(root)
    found.sort(key=lambda w: (w.real, w.imag))
    return [classify_fixed_point(r) for r in found]


def _field(t: float, z: complex) -> complex:
    z2 = z * z
    r2 = z.real * z.real + z.imag * z.imag
    return 0.25 * (r2 * r2 - 2.0 * z * z2.real - z2 + 2.0 * z)


def integrate(
    z0,
    cfg: Optional[IntegratorConfig] = None,
    target=None,
) -> Trajectory:
    """Solve z' = v(z) from z0.

    With a ``target`` the run stops (CONVERGED) once within
    ``cfg.convergence_radius`` of it.
    """
    cfg = cfg or IntegratorConfig()
    z0 = as_complex(z0, "z0")
    targets = () if target is None else (as_complex(target, "target"),)
    return solve(_field, z0, cfg, targets)


def circle_decompose(theta):
    """Radial and horizontal components of v on the circle z = 1 + e^{i theta}.

    The radial part is the projection on the outward unit normal
    (z - 1)/|z - 1| = e^{i theta}; it vanishes identically.
    """
    w = np.exp(1j * np.asarray(theta, dtype=float))
    v = eval_v(1.0 + w)
    radial = (v * np.conj(w)).real
    horizontal = v.real
    if np.ndim(theta) == 0:
        return float(radial), float(horizontal)
    return radial, horizontal


def horizontal_closed_form(theta):
    """Re v(1 + e^{i theta}) = sin^2(theta) (3 + 2 cos theta) / 2.

    This is the symbolic expansion of the field on the circle. The often
    quoted (3/4) sin^2(theta) (2 + cos theta) matches it only where
    cos theta = 0; both are positive away from theta in {0, pi}.
    """
    s = np.sin(theta)
    return 0.5 * s * s * (3.0 + 2.0 * np.cos(theta))


# ---------------------------------------------------------------------------
# basin sampling

FATE_LABELS = {0: "-1", 1: "0", 2: "1", 3: "2"}


@dataclass(frozen=True)
class GridSpec:
    box: Box
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid resolution must be positive")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        b = self.box
        xs = np.linspace(b.re_min, b.re_max, self.nx) if self.nx > 1 else np.array([0.5 * (b.re_min + b.re_max)])
        ys = np.linspace(b.im_min, b.im_max, self.ny) if self.ny > 1 else np.array([0.5 * (b.im_min + b.im_max)])
        return xs, ys


def fate(z0, cfg: Optional[IntegratorConfig] = None) -> str:
    """Label where the orbit of z0 ends: a zero, DIVERGED or MAX_TIME."""
    cfg = cfg or IntegratorConfig()
    traj = solve(_field, complex(z0), cfg, ZEROS)
    if traj.terminal_status is TerminalStatus.CONVERGED:
        return FATE_LABELS[traj.target_index]
    return traj.terminal_status.value


def _fate_row(args):
    row, cfg = args
    return [fate(z, cfg) for z in row]


@dataclass
class BasinRaster:
    grid: GridSpec
    re: np.ndarray
    im: np.ndarray
    labels: list[list[str]]  # labels[j][i] for im[j], re[i]

    def to_csv(self) -> str:
        lines = ["re,im,label"]
        for j, y in enumerate(self.im.tolist()):
            for i, x in enumerate(self.re.tolist()):
                lines.append(f"{x:.17g},{y:.17g},{self.labels[j][i]}")
        return "\n".join(lines) + "\n"


def basin_sample(grid: GridSpec, cfg: Optional[IntegratorConfig] = None, workers: int = 1) -> BasinRaster:
    """Label every grid point by the fate of its orbit.

    Cells are independent, so ``workers > 1`` farms rows out to processes
    without changing the output.
    """
    if grid.nx < 2 or grid.ny < 2:
        raise ValueError("basin_sample needs at least 2 points per axis")
    cfg = cfg or IntegratorConfig()
    xs, ys = grid.axes()
    rows = [[complex(x, y) for x in xs] for y in ys]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            labels = list(pool.map(_fate_row, [(r, cfg) for r in rows]))
    else:
        labels = [_fate_row((r, cfg)) for r in rows]
    return BasinRaster(grid, xs, ys, labels)


# ---------------------------------------------------------------------------
# perturbed flow

def _check_monotone(a: Callable[[float], float], t_max: float) -> None:
    ts = np.linspace(0.0, t_max, 2001)
    vals = np.array([a(float(t)) for t in ts])
    if np.any(vals < 0) or np.any(np.diff(vals) > 1e-15 * max(1.0, float(np.max(vals)))):
        raise ValueError("noise amplitude must be non-negative and non-increasing")


def unit_disk_noise(rng_seed: int, n: int) -> np.ndarray:
    """n points uniform in the closed unit disk, drawn from PCG64(rng_seed)."""
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    radius = np.sqrt(rng.random(n))
    angle = 2.0 * np.pi * rng.random(n)
    return radius * np.exp(1j * angle)


def perturbed_integrate(
    z0,
    noise_amplitude: Callable[[float], float],
    rng_seed: int = 0,
    cfg: Optional[IntegratorConfig] = None,
    noise_dt: float = 0.05,
) -> Trajectory:
    """Solve z' = v(z) + a(t) u(t) with a pseudorandom forcing |u| <= 1.

    ``u`` interpolates linearly between knots spaced ``noise_dt`` apart whose
    values are uniform in the unit disk, drawn from numpy's PCG64 generator
    seeded with ``rng_seed``; runs are reproducible bit-for-bit. Linear
    interpolation keeps ``u`` continuous (the adaptive stepper only sees
    kinks) and inside the disk. With ``a == 0`` the result is identical to
    :func:`integrate` without a target.
    """
    cfg = cfg or IntegratorConfig()
    if noise_dt <= 0:
        raise ValueError("noise_dt must be positive")
    _check_monotone(noise_amplitude, cfg.t_max)
    n_knots = int(math.ceil(cfg.t_max / noise_dt)) + 2
    u = unit_disk_noise(rng_seed, n_knots).tolist()

    def forced(t: float, z: complex) -> complex:
        s = t / noise_dt
        k = min(int(s), n_knots - 2)
        frac = s - k
        return _field(t, z) + noise_amplitude(t) * ((1.0 - frac) * u[k] + frac * u[k + 1])

    return solve(forced, as_complex(z0, "z0"), cfg)


def tail_accumulation(traj: Trajectory, fraction: float = 0.1) -> tuple[complex, float]:
    """Mean and diameter of the samples in the last ``fraction`` of the run.

    The window is measured in time, not sample count: adaptive steps cluster
    where the forcing is large, so a count-based window would sit early.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    t_end = float(traj.t[-1])
    tail = traj.z[traj.t >= t_end * (1.0 - fraction)]
    k = len(tail)
    mean = complex(np.mean(tail))
    diam = 0.0
    for i in range(0, k, 1024):
        block = tail[i:i + 1024]
        diam = max(diam, float(np.max(np.abs(block[:, None] - tail[None, :]))))
    return mean, diam


# ---------------------------------------------------------------------------
# phase portrait

def portrait_svg(grid: GridSpec, width: int = 600, height: int = 480) -> str:
    """Arrows of v (normalized direction) on the grid plus the circle |z-1|=1."""
    xs, ys = grid.axes()
    b = grid.box
    span_x = (b.re_max - b.re_min) or 1.0
    span_y = (b.im_max - b.im_min) or 1.0
    pad = 20.0

    def to_px(z: complex) -> tuple[float, float]:
        px = pad + (z.real - b.re_min) / span_x * (width - 2 * pad)
        py = height - pad - (z.imag - b.im_min) / span_y * (height - 2 * pad)
        return px, py

    cell = min((width - 2 * pad) / max(len(xs), 1), (height - 2 * pad) / max(len(ys), 1))
    arrow_len = 0.8 * cell if (len(xs) > 1 or len(ys) > 1) else 0.2 * min(width, height)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" '
        'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="black"/></marker></defs>',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for y in ys:
        for x in xs:
            z = complex(x, y)
            v = complex(eval_v(z))
            x0, y0 = to_px(z)
            if abs(v) == 0.0:
                out.append(f'<circle cx="{x0:.3f}" cy="{y0:.3f}" r="2" fill="red"/>')
                continue
            d = v / abs(v)
            x1 = x0 + arrow_len * d.real
            y1 = y0 - arrow_len * d.imag
            out.append(
                f'<line x1="{x0:.3f}" y1="{y0:.3f}" x2="{x1:.3f}" y2="{y1:.3f}" '
                f'stroke="black" stroke-width="1" marker-end="url(#head)"/>'
            )
    cx, cy = to_px(1 + 0j)
    rx = (width - 2 * pad) / span_x
    ry = (height - 2 * pad) / span_y
    out.append(
        f'<ellipse cx="{cx:.3f}" cy="{cy:.3f}" rx="{rx:.3f}" ry="{ry:.3f}" '
        f'fill="none" stroke="blue" stroke-width="1.5"/>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def circle_orbit_start(theta0: float = math.pi - 1e-3) -> complex:
    """Starting point on |z-1| = 1 next to the repelling zero 0."""
    return 1.0 + complex(math.cos(theta0), math.sin(theta0))


__all__ = [
    "ZEROS",
    "Box",
    "BasinRaster",
    "FixedPointClass",
    "FixedPointReport",
    "GridSpec",
    "IntegratorConfig",
    "Method",
    "TerminalStatus",
    "Trajectory",
    "basin_sample",
    "circle_decompose",
    "circle_orbit_start",
    "classify_fixed_point",
    "eval_v",
    "fate",
    "find_fixed_points",
    "horizontal_closed_form",
    "integrate",
    "perturbed_integrate",
    "portrait_svg",
    "real_jacobian",
    "tail_accumulation",
    "unit_disk_noise",
    "wirtinger_derivatives",
]
