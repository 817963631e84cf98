"""Hyperbolic-geometry calculators in the upper half-space model of H^3.

Points of H^3 are pairs (z, h) with z complex and h > 0. SL(2, C) acts by
the Poincare extension of its Mobius action on the boundary. Most functions
here are closed-form bounds (Margulis tube areas, shadow areas, visual
measure, Poincare series of cyclic loxodromic groups, volume growth of
neighbourhoods of the convex core); each has an independent numeric route
used in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolatedError, as_complex
from .quadrature import QuadConfig, integrate_1d, integrate_2d
from .schwarzian import MobiusTransform

LOG_1_PLUS_SQRT2 = math.log(1 + math.sqrt(2))
SHADOW_MIN_RADIUS = LOG_1_PLUS_SQRT2 + math.sqrt(2)
DEFAULT_EPSILON3 = 0.1  # 3-dimensional Margulis constant; no sharpness claimed


@dataclass(frozen=True)
class TubeSpec:
    L: complex
    epsilon: float
    R: float

    def __post_init__(self):
        object.__setattr__(self, "L", as_complex(self.L, "L"))
        if self.L.real <= 0 or self.epsilon <= 0 or self.R < 0:
            raise ValueError("need Re L > 0, epsilon > 0, R >= 0")

    def is_consistent(self) -> bool:
        """Boundary torus area is at least pi epsilon^2."""
        return tube_boundary_area(self.R, self.L.real) >= math.pi * self.epsilon**2 * (1 - 1e-12)


@dataclass(frozen=True)
class HalfSpaceSpec:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class LoxodromicCyclicGroup:
    t: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("translation length t must be positive")

    def generator(self, n: int = 1) -> MobiusTransform:
        lam = n * complex(self.t, self.theta)
        return MobiusTransform(np.exp(lam / 2), 0, 0, np.exp(-lam / 2))


@dataclass(frozen=True)
class CoreNeighborhoodSpec:
    chi_abs: float
    bending_length: float
    offset: float

    def __post_init__(self):
        if min(self.chi_abs, self.bending_length, self.offset) < 0:
            raise ValueError("all fields must be non-negative")


# --- points and isometries of H^3 -------------------------------------------

def act(m: MobiusTransform, z: complex, h: float) -> tuple[complex, float]:
    """Poincare extension of m applied to the point (z, h)."""
    cz_d = m.c * z + m.d
    den = abs(cz_d) ** 2 + abs(m.c) ** 2 * h * h
    z_new = ((m.a * z + m.b) * cz_d.conjugate() + m.a * m.c.conjugate() * h * h) / den
    return complex(z_new), h / den


def distance(p: tuple[complex, float], q: tuple[complex, float]) -> float:
    """Hyperbolic distance, from cosh d - 1 = (|zp-zq|^2 + (hp-hq)^2)/(2 hp hq).

    Uses d = 2 asinh(sqrt((cosh d - 1)/2)), which stays accurate for small d
    where acosh(1 + x) loses half the digits.
    """
    (zp, hp), (zq, hq) = p, q
    x = (abs(zp - zq) ** 2 + (hp - hq) ** 2) / (2 * hp * hq)
    return 2 * math.asinh(math.sqrt(max(0.0, x) / 2))


# --- Margulis tubes -----------------------------------------------------------

def tube_boundary_area(R: float, ReL: float) -> float:
    if R < 0 or ReL <= 0:
        raise ValueError("need R >= 0 and Re L > 0")
    return math.pi * math.sinh(2 * R) * ReL


def min_length_bound(epsilon: float, R: float) -> float:
    """Lower bound epsilon^2 / sinh(2R) for Re L (and |L|) of a tube core."""
    if epsilon <= 0 or R <= 0:
        raise ValueError("need epsilon > 0 and R > 0")
    if 2 * R > 700:  # sinh overflows; the bound underflows to 0 anyway
        return 0.0
    return epsilon**2 / math.sinh(2 * R)


# --- disks in the quotient cylinder -------------------------------------------

DISK_QUAD = QuadConfig(order=10, rel_tol=1e-10, abs_tol=1e-14)


def quotient_disk_area_exact(r: float, quad_cfg: QuadConfig = DISK_QUAD) -> float:
    """Area of |z| < r in the metric 4|dz|^2/|z^2 - 1|^2, by quadrature.

    That metric is the pullback of |dw|^2/|w|^2 under w = (z-1)/(z+1), so
    the geodesic with endpoints -1, 1 becomes the axis 0..infinity.
    """
    if not 0 < r <= 0.9:
        raise ValueError("r must lie in (0, 0.9]")

    def integrand(rho, ang):
        z = rho * np.exp(1j * ang)
        return 4 * rho / np.abs(z * z - 1) ** 2

    # geometric panel refinement toward the rim, where the density peaks
    breaks = [r * (1 - 0.5**k) for k in range(1, 8)]
    res = integrate_2d(integrand, (0.0, r), (0.0, 2 * math.pi), quad_cfg, x_breaks=breaks)
    return res.value.real


def quotient_disk_area_closed(r: float) -> float:
    """4 pi r^2/(1 - r^2)^2: peak density on the rim times the Euclidean area.

    This is the upper bound pi/sinh^2(d) with r = e^{-d}, not the area.
    """
    return 4 * math.pi * r * r / (1 - r * r) ** 2


def quotient_disk_area_series(r: float) -> float:
    """Exact area 4 pi artanh(r^2), from integrating the series of 1/(1 - z^2)."""
    return 4 * math.pi * math.atanh(r * r)


def quotient_disk_area_bound(d: float) -> float:
    """pi / sinh^2(d): area bound for a disk whose half-space is at distance d."""
    if not d > 0:
        raise ValueError("d must be positive")
    return math.pi / math.sinh(d) ** 2


def disk_radius_for_distance(d: float) -> float:
    """r = e^{-d} for the concentric model configuration."""
    return math.exp(-d)


# --- visual measure and projections --------------------------------------------

def visual_area_exact(d: float) -> float:
    """Visual area 2 pi (1 - tanh d) of a half-space at distance d.

    Evaluated as 4 pi / (e^{2d} + 1), which avoids cancellation for large d.
    """
    if d < 0:
        raise ValueError("d must be non-negative")
    if d > 350:
        return 0.0
    return 4 * math.pi / (math.exp(2 * d) + 1)


def visual_area_lower_bound(d: float) -> float:
    return math.pi * math.exp(-2 * d)


def projection_halfspace_distance_bound(epsilon: float) -> float:
    """log(2 coth eps), the largest possible distance from x to H."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return math.log(2 / math.tanh(epsilon))


def lambert_quadrilateral(d1: float) -> float:
    """Opposite side d2 with sinh(d1) sinh(d2) = 1."""
    if not d1 > 0:
        raise ValueError("d1 must be positive")
    return math.asinh(1 / math.sinh(d1))


# --- shadows -------------------------------------------------------------------

def halfspace_shadow_distance(R_eps3: float, ell_u: float) -> float:
    """d(alpha, H) = R + ell(u) - log(1 + sqrt 2) for a shadowing half-space."""
    if R_eps3 < SHADOW_MIN_RADIUS * (1 - 1e-15):
        raise HypothesisViolatedError(
            f"tube radius {R_eps3} is below log(1+sqrt 2) + sqrt 2 = {SHADOW_MIN_RADIUS}"
        )
    if ell_u < 0:
        raise HypothesisViolatedError("ell(u) must be non-negative")
    return R_eps3 + ell_u - LOG_1_PLUS_SQRT2


def shadow_area_from_distance(d: float) -> float:
    return 16 * math.pi * math.exp(-2 * d)


def shadow_area_bound(R_eps3: float, ell_u: float) -> float:
    """16 pi exp(-2 d) with d from :func:`halfspace_shadow_distance`."""
    return shadow_area_from_distance(halfspace_shadow_distance(R_eps3, ell_u))


# --- cyclic loxodromic groups ----------------------------------------------------

def loxodromic_displacement(g: LoxodromicCyclicGroup, n: int, r: float) -> float:
    """Distance moved by g^n at a point at distance r from its axis.

    cosh d = cosh^2 r cosh(nt) - sinh^2 r cos(n theta); rewritten as
    sinh^2(d/2) = cosh^2 r sinh^2(nt/2) + sinh^2 r sin^2(n theta/2), which
    is non-negative term by term, so no clamping is needed.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    half = (math.cosh(r) * math.sinh(n * g.t / 2)) ** 2 + (math.sinh(r) * math.sin(n * g.theta / 2)) ** 2
    return 2 * math.asinh(math.sqrt(half))


def loxodromic_displacement_matrix(g: LoxodromicCyclicGroup, n: int, r: float) -> float:
    """Same distance via the SL(2, C) action on upper half-space.

    The axis is the vertical geodesic over 0; the point (sinh r, 1) lies at
    distance r from it.
    """
    p = (complex(math.sinh(r), 0.0), 1.0)
    q = act(g.generator(n), *p)
    return distance(p, q)


def poincare_series_cyclic(g: LoxodromicCyclicGroup, r: float = 0.0, tail_tol: float = 1e-16) -> float:
    """Sum over n in Z of exp(-2 d(x, g^n x)) for x at distance r from the axis.

    Each displacement is at least |n| t, so the terms past N are bounded by
    the geometric tail 2 e^{-2(N+1)t} / (1 - e^{-2t}); summation stops once
    that falls below ``tail_tol``.
    """
    if not tail_tol > 0:
        raise ValueError("tail_tol must be positive")
    q = math.exp(-2 * g.t)
    terms = [1.0]
    n = 0
    while True:
        n += 1
        tail = 2 * q ** (n) / (1 - q)  # bound on terms with |m| >= n
        if tail < tail_tol:
            break
        terms.append(math.exp(-2 * loxodromic_displacement(g, n, r)))
        terms.append(math.exp(-2 * loxodromic_displacement(g, -n, r)))
    # add small terms first
    return math.fsum(sorted(terms))


def poincare_bound(epsilon: float) -> float:
    """8 coth^2(eps), the uniform bound on the series."""
    return 8 / math.tanh(epsilon) ** 2


def orthosum_bound(N: int, D: float, P: float) -> float:
    """N e^{2D} P: an orthogeodesic exponential sum dominated by a Poincare series."""
    if N < 1 or D < 0 or P < 0:
        raise ValueError("need N >= 1, D >= 0, P >= 0")
    return N * math.exp(2 * D) * P


# --- neighbourhoods of the convex core ------------------------------------------

def neighborhood_boundary_area(spec: CoreNeighborhoodSpec) -> float:
    t = spec.offset
    return (2 * math.pi * spec.chi_abs * math.cosh(t) ** 2
            + spec.bending_length * math.sinh(t) * math.cosh(t))


def neighborhood_volume(spec: CoreNeighborhoodSpec) -> float:
    """Volume of the shell between the core and its offset-eps neighbourhood."""
    e = spec.offset
    return (2 * math.pi * spec.chi_abs * (e / 2 + math.sinh(2 * e) / 4)
            + spec.bending_length * math.sinh(e) ** 2 / 2)


def neighborhood_volume_numeric(spec: CoreNeighborhoodSpec, quad_cfg: QuadConfig = QuadConfig()) -> float:
    """Integrate the boundary area A_t over t in [0, offset]."""
    if spec.offset == 0:
        return 0.0

    def area(t):
        return (2 * math.pi * spec.chi_abs * np.cosh(t) ** 2
                + spec.bending_length * np.sinh(t) * np.cosh(t))

    return integrate_1d(area, 0.0, spec.offset, quad_cfg).value.real


def bending_length_bound(chi_abs: float, delta: float, A: float, B: float) -> float:
    """(A + B/delta) |chi|, with caller-supplied universal constants A, B."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return (A + B / delta) * chi_abs
