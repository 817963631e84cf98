"""Power maps g_c on the upper half-plane and their Schwarzian derivatives.

    g_c(z) = exp(c Log z) / exp(c Log i)     (c != 0)
    g_0(z) = Log z

with the principal logarithm. The Schwarzian of g_c is the quadratic
differential ((1 - c^2)/2) dz^2/z^2, and g_c is univalent on the upper
half-plane exactly when |c - 1| <= 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import StencilOutOfDomainError, as_complex

_LOG_I = 0.5j * math.pi


@dataclass(frozen=True)
class PowerMapSpec:
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "c", as_complex(self.c, "c"))

    def __call__(self, z):
        if self.c == 0:
            return np.log(z)
        return np.exp(self.c * (np.log(z) - _LOG_I))

    def derivatives(self, z: complex) -> tuple[complex, complex, complex, complex]:
        """(f, f', f'', f''') at z, analytically."""
        c = self.c
        if c == 0:
            return cmath.log(z), 1 / z, -1 / z**2, 2 / z**3
        f = cmath.exp(c * (cmath.log(z) - _LOG_I))
        return f, c * f / z, c * (c - 1) * f / z**2, c * (c - 1) * (c - 2) * f / z**3


@dataclass(frozen=True)
class MobiusTransform:
    """z -> (az + b)/(cz + d), stored with ad - bc = 1."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_coeffs(cls, a, b, c, d) -> "MobiusTransform":
        a, b, c, d = (complex(x) for x in (a, b, c, d))
        det = a * d - b * c
        if det == 0:
            raise ValueError("singular Mobius coefficients")
        s = cmath.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(1, 0, 0, 1)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def det_error(self) -> float:
        return abs(self.a * self.d - self.b * self.c - 1)

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def __matmul__(self, other: "MobiusTransform") -> "MobiusTransform":
        m = self.matrix @ other.matrix
        return MobiusTransform.from_coeffs(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def inverse(self) -> "MobiusTransform":
        return MobiusTransform(self.d, -self.b, -self.c, self.a)


@dataclass(frozen=True)
class Composed:
    """outer o inner, e.g. a Mobius transform after a power map."""

    outer: Callable
    inner: Callable

    def __call__(self, z):
        return self.outer(self.inner(z))


HolomorphicMap = Union[PowerMapSpec, MobiusTransform, Composed, Callable]


def schwarzian_closed_form(c) -> complex:
    """Coefficient C with S(g_c) = C dz^2/z^2."""
    c = as_complex(c, "c")
    return (1 - c * c) / 2


def schwarzian_from_derivatives(d1: complex, d2: complex, d3: complex) -> complex:
    r = d2 / d1
    return d3 / d1 - 1.5 * r * r


def schwarzian_analytic(spec: PowerMapSpec, z) -> complex:
    _, d1, d2, d3 = spec.derivatives(as_complex(z))
    return schwarzian_from_derivatives(d1, d2, d3)


# 7-point central stencils at offsets -3..3
_W1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
_W2 = np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0
_W3 = np.array([1, -8, 13, 0, -13, 8, -1]) / 8.0
_OFFSETS = np.arange(-3, 4)


def schwarzian_numeric(f: HolomorphicMap, z, h: float | None = None) -> complex:
    """S(f)(z) from a horizontal 7-point finite-difference stencil.

    Default step is ``4e-3 * |z|``, which balances the h^4 truncation error
    against roundoff amplified by 1/h^3 in the third derivative. Horizontal
    stencils keep every node at the height of z, so they never meet the
    branch cut of Log.
    """
    z = as_complex(z)
    if z.imag <= 0:
        raise StencilOutOfDomainError(f"z = {z} is not in the upper half-plane")
    if h is None:
        h = 4e-3 * abs(z)
    if not h > 0:
        raise StencilOutOfDomainError("stencil step must be positive")
    nodes = z + h * _OFFSETS
    with np.errstate(all="ignore"):
        vals = np.asarray(f(nodes), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise StencilOutOfDomainError(f"map is not finite on the stencil around {z}")
    d1 = np.dot(_W1, vals) / h
    d2 = np.dot(_W2, vals) / h**2
    d3 = np.dot(_W3, vals) / h**3
    if d1 == 0:
        raise StencilOutOfDomainError(f"derivative vanishes at {z}")
    return complex(schwarzian_from_derivatives(d1, d2, d3))


def univalence_criterion(c) -> bool:
    """g_c is univalent on the upper half-plane iff |c - 1| <= 1."""
    return abs(as_complex(c, "c") - 1) <= 1.0


def strip_intersection_length(c) -> float:
    """Length of a vertical line's intersection with c * {0 < Im w < pi}.

    Infinite unless Re c > 0; exp is injective on the slanted strip iff the
    length is at most 2 pi.
    """
    c = as_complex(c, "c")
    if c.real <= 0:
        return math.inf
    return abs(c) ** 2 * math.pi / c.real


def strip_criterion(c) -> bool:
    return strip_intersection_length(c) <= 2 * math.pi * (1 + 1e-15)


def empirical_injectivity(
    c,
    n_samples: int = 10_000,
    rng_seed: int = 0,
    margin: float = 0.05,
    log_radius: float = 12.0,
    n_neighbors: int = 6,
) -> bool:
    """Monte Carlo search for two points of the upper half-plane with equal image.

    Samples are drawn in logarithmic coordinates zeta = Log z on the
    rectangle [-log_radius, log_radius] x [1e-3, pi - 1e-3], i.e. a closed
    annular sector, so that partners differing by a large modulus ratio are
    still sampled. Candidate pairs are nearest neighbours in the image chart
    (log|g|, arg g); each is refined by Newton's method toward an exact
    preimage of the other sample's image. Returns False iff a refined point
    lies in the upper half-plane, at log-distance > ``margin`` from the
    sample, with image log-distance < ``margin * 1e-3``.
    """
    c = as_complex(c, "c")
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    g = PowerMapSpec(c)
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    eps = 1e-3
    zeta = (rng.uniform(-log_radius, log_radius, n_samples)
            + 1j * rng.uniform(eps, math.pi - eps, n_samples))
    with np.errstate(all="ignore"):
        w = g(np.exp(zeta))
        logw = np.log(np.abs(w))
        argw = np.angle(w)
    ok = np.isfinite(logw) & np.isfinite(argw)
    if not np.all(ok):
        zeta, logw, argw = zeta[ok], logw[ok], argw[ok]
    n = len(zeta)
    # periodic in the angle: add copies shifted by +-2 pi
    pts = np.column_stack([logw, argw])
    tiled = np.vstack([pts, pts + [0, 2 * math.pi], pts - [0, 2 * math.pi]])
    tree = cKDTree(tiled)
    k = min(n_neighbors + 1, len(tiled))
    _, idx = tree.query(pts, k=k)
    idx = idx % n

    src = np.repeat(np.arange(n), k)
    start = idx.ravel()
    far = np.abs(zeta[start] - zeta[src]) > margin
    src, start = src[far], start[far]
    if len(src) == 0:
        return True

    target = w[src]
    zc = zeta[start].copy()
    with np.errstate(all="ignore"):
        for _ in range(40):
            if c == 0:
                val = zc - np.log(target)
                zc = zc - val
                continue
            # solve exp(c (zeta - Log i)) = target in zeta
            gz = np.exp(c * (zc - _LOG_I))
            zc = zc - (gz - target) / (c * gz)
        gz = g(np.exp(zc))
        dist_img = np.abs(np.log(gz / target))
    inside = (zc.imag > 0) & (zc.imag < math.pi) & np.isfinite(zc)
    apart = np.abs(zc - zeta[src]) > margin
    hit = inside & apart & (dist_img < margin * 1e-3)
    return not bool(np.any(hit))


def mobius_invariance_check(c, m: MobiusTransform, z, h: float | None = None) -> float:
    """|S(m o g_c)(z) - S(g_c)(z)|, both computed numerically."""
    g = PowerMapSpec(c)
    return abs(schwarzian_numeric(Composed(m, g), z, h) - schwarzian_numeric(g, z, h))


def s_invariance_check(C, s: float, z) -> float:
    """Defect of phi = C dz^2/z^2 under pullback by z -> e^s z."""
    C = complex(C)
    z = as_complex(z)
    if s == 0:
        raise ValueError("s must be nonzero")
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half-plane")
    es = math.exp(s)
    w = es * z
    return abs(C / (w * w) * es * es - C / (z * z))
