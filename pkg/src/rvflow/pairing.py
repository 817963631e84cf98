"""Beltrami / quadratic-differential pairings on quotient annuli.

The annulus A_s is the quotient of the upper half-plane by z -> e^s z. In the
strip model {0 < Im w < pi} (w = Log z) it is [0, s] x (0, pi) with
hyperbolic density 1/sin^2(Im w), and dz^2/z^2 becomes dw^2. For the
invariant differential phi = ((1 - c^2)/2) dz^2/z^2 the negative harmonic
Beltrami differential is mu(w) = sin^2(Im w) (conj(c)^2 - 1)/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import as_complex
from .quadrature import QuadConfig, integrate_2d
from .schwarzian import PowerMapSpec

STRIP_QUAD = QuadConfig(order=12, rel_tol=1e-13, abs_tol=1e-15)


@dataclass(frozen=True)
class AnnulusSpec:
    s: float

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ValueError(f"annulus modulus s must be positive, got {self.s!r}")


@dataclass(frozen=True)
class LengthPair:
    ell: float
    L: complex

    def __post_init__(self):
        object.__setattr__(self, "L", as_complex(self.L, "L"))
        if not self.ell > 0:
            raise ValueError("ell must be positive")
        if not self.L.real > 0:
            raise ValueError("Re L must be positive")


@dataclass(frozen=True)
class PairingResult:
    value: complex
    est_error: float
    n_evals: int

    def to_dict(self) -> dict:
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "est_error": self.est_error,
            "n_evals": self.n_evals,
        }


def beltrami_strip(c, y):
    """mu_phi in strip coordinates (depends on Im w only)."""
    c = complex(c)
    return np.sin(y) ** 2 * (np.conj(c) ** 2 - 1) / 2


def pair_strip(c, annulus: AnnulusSpec, quad_cfg: QuadConfig = STRIP_QUAD) -> PairingResult:
    """<mu_phi, dz^2/z^2> over the fundamental domain [0, s] x (0, pi)."""
    c = as_complex(c, "c")
    coef = (np.conj(c) ** 2 - 1) / 2

    def integrand(x, y):
        # mu * psi with psi == 1 in strip coordinates
        return coef * np.sin(y) ** 2 + 0 * x

    res = integrate_2d(integrand, (0.0, annulus.s), (0.0, math.pi), quad_cfg)
    return PairingResult(res.value, res.est_error, res.n_evals)


def pair_strip_exact(c, s: float) -> complex:
    c = complex(c)
    return s * math.pi * (c.conjugate() ** 2 - 1) / 4


def F_ell(c) -> float:
    """Limit of d log(ell) along the flow: (Re(c^2) - 1)/2."""
    c = as_complex(c, "c")
    return ((c * c).real - 1) / 2


def F_ell_from_pairing(c, quad_cfg: QuadConfig = STRIP_QUAD) -> float:
    return 2 / math.pi * pair_strip(c, AnnulusSpec(1.0), quad_cfg).value.real


def F_L(c) -> complex:
    """Limit of d log(L) along the flow: c (conj(c)^2 - 1)/4."""
    c = as_complex(c, "c")
    return c * (c.conjugate() ** 2 - 1) / 4


def dc_limit(c) -> complex:
    """Limit of dc along the flow; the same polynomial as the model field."""
    c = as_complex(c, "c")
    r2 = c.real * c.real + c.imag * c.imag
    c2 = c * c
    return 0.25 * (r2 * r2 - 2 * c * c2.real - c2 + 2 * c)


def pair_pullback(c, s: float, quad_cfg: QuadConfig = STRIP_QUAD) -> PairingResult:
    """F_L before the limit: (1/(pi L)) <mu_phi, g_c^*(dz^2/z^2)>_s with L = c s.

    Evaluated in the upper half-plane on the half-annulus 1 <= |z| <= e^s,
    with the pullback (g_c'/g_c)^2 dz^2 computed from the power map's
    derivatives and hyperbolic density 1/(Im z)^2. Polar coordinates
    z = e^{u + i v} turn the domain into [0, s] x (0, pi).
    """
    c = as_complex(c, "c")
    if c == 0:
        raise ValueError("pullback pairing needs c != 0 (L = c * s vanishes)")
    AnnulusSpec(s)
    g = PowerMapSpec(c)
    C = (1 - c * c) / 2

    def integrand(u, v):
        z = np.exp(u + 1j * v)
        f = g(z)
        dlog = c * f / z / f  # g'/g
        phi = C / (z * z)
        mu = -np.conj(phi) * z.imag ** 2
        jac = np.abs(z) ** 2  # dx dy = |z|^2 du dv
        return mu * dlog * dlog * jac

    res = integrate_2d(integrand, (0.0, s), (0.0, math.pi), quad_cfg)
    L = c * s
    return PairingResult(res.value / (math.pi * L), res.est_error / abs(math.pi * L), res.n_evals)


def bers_region(pair: LengthPair, slack: float = 1e-14) -> tuple[bool, complex]:
    """Bers' inequality 1/ell <= 2 Re L / |L|^2, and the ratio c = L/ell.

    Equivalent to |c - 1| <= 1. ``slack`` is a relative allowance for ties.
    """
    L = pair.L
    lhs = 1 / pair.ell
    rhs = 2 * L.real / (abs(L) ** 2)
    return lhs <= rhs * (1 + slack), L / pair.ell


def in_closed_disk(c, slack: float = 1e-14) -> bool:
    return abs(complex(c) - 1) <= 1 + slack


def real_length_bound_holds(pair: LengthPair) -> bool:
    """Optional check Re L <= 2 ell; reported, never enforced."""
    return pair.L.real <= 2 * pair.ell


def aux_term_bound(eta: float, ReL: float) -> float:
    """Ceiling eta * Re L on the auxiliary term."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    if ReL < 0:
        raise ValueError("Re L must be non-negative")
    return eta * ReL
