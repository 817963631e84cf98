"""Certified distance bounds for contracting iterations.

A small chain of calculators: a sup-norm bound on a Beltrami differential
from length-derivative data, the Teichmuller-distance bound that a
quasiconformal reflection gives for a Schwarzian of small sup norm, and the
Banach tail bound turning a one-step distance into a distance to the fixed
point. The numeric constants of the sup-norm bound are not known
constructively; callers supply them, and the default of 1 only gives results
of the right shape.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from .errors import MaxItersError, NotContractiveError, OutOfDomainError

log = logging.getLogger(__name__)

# Nehari: the Schwarzian of a univalent map has sup norm at most 3/2
NEHARI_SUP_CEILING = 1.5


@dataclass(frozen=True)
class ContractionSpec:
    factor: float
    map: Callable[[Any], Any]
    metric: Callable[[Any, Any], float] = lambda x, y: abs(x - y)

    def __post_init__(self):
        if not 0 < self.factor < 1:
            raise ValueError("contraction factor must lie in (0, 1)")


@dataclass(frozen=True)
class NormBudget:
    sup_norm: float = 0.0
    l2_norm: float = 0.0
    max_log_length_deriv: float = 0.0
    wolpert_c: float = 1.0

    def __post_init__(self):
        if min(self.sup_norm, self.l2_norm, self.max_log_length_deriv) < 0:
            raise ValueError("norms must be non-negative")
        if not self.wolpert_c > 0:
            raise ValueError("wolpert_c must be positive")
        if self.sup_norm > NEHARI_SUP_CEILING:
            raise ValueError(f"sup norm {self.sup_norm} exceeds the Nehari ceiling 3/2")


@dataclass(frozen=True)
class BanachResult:
    fixed_point: Any
    n_iters: int
    certified_radius: float


@dataclass(frozen=True)
class Certificate:
    bound: float
    inputs: dict
    formula_id: str

    def to_dict(self) -> dict:
        return {"bound": self.bound, "inputs": self.inputs, "formula_id": self.formula_id}


def ahlfors_weill_bound(k: float) -> float:
    """Teichmuller distance bound (1/2) log((1 + 2k)/(1 - 2k)) for sup norm k."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k >= 0.5:
        raise OutOfDomainError(f"k = {k} must be below 1/2")
    return 0.5 * math.log((1 + 2 * k) / (1 - 2 * k))


def contraction_tail_bound(d_first_step: float, c: float) -> float:
    """d(x, x*) <= d(x, f(x)) / (1 - c) for a c-contraction f."""
    if d_first_step < 0:
        raise ValueError("distance must be non-negative")
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    return d_first_step / (1 - c)


def wolpert_sup_bound(budget: NormBudget) -> float:
    if budget.wolpert_c == 1.0:
        log.debug("wolpert_c = 1 is a placeholder; the bound is shape-correct, not certified")
    return budget.wolpert_c * (0.5 * budget.max_log_length_deriv + budget.l2_norm)


def chained_tail_bound(sup_norm: float, contraction: float) -> float:
    """Ahlfors-Weill distance for one step, then the Banach tail bound."""
    return contraction_tail_bound(ahlfors_weill_bound(sup_norm), contraction)


def wolpert_chain(budget: NormBudget, contraction: float) -> Certificate:
    """Feed the sup-norm bound through Ahlfors-Weill and the tail bound.

    Returns an infinite bound when the sup-norm bound is not below 1/2.
    """
    sup = wolpert_sup_bound(budget)
    bound = chained_tail_bound(sup, contraction) if sup < 0.5 else math.inf
    return Certificate(
        bound,
        {
            "sup_norm": budget.sup_norm,
            "l2_norm": budget.l2_norm,
            "max_log_length_deriv": budget.max_log_length_deriv,
            "wolpert_c": budget.wolpert_c,
            "contraction": contraction,
            "sup_bound": sup,
        },
        "wolpert->ahlfors_weill->banach_tail",
    )


def _spot_check(spec: ContractionSpec, x0, rng: np.random.Generator, n_pairs: int, slack: float) -> None:
    scale = max(1.0, spec.metric(x0, spec.map(x0)))
    for _ in range(n_pairs):
        dx = scale * (rng.standard_normal() + 1j * rng.standard_normal())
        dy = scale * (rng.standard_normal() + 1j * rng.standard_normal())
        x = x0 + 0.5 * dx
        y = x0 + 0.5 * dy
        dxy = spec.metric(x, y)
        if dxy == 0:
            continue
        ratio = spec.metric(spec.map(x), spec.map(y)) / dxy
        if ratio > spec.factor * (1 + slack):
            raise NotContractiveError(
                f"Lipschitz ratio {ratio:.4g} exceeds factor {spec.factor} at {x}, {y}"
            )


def banach_iterate(
    spec: ContractionSpec,
    x0,
    tol: float = 1e-12,
    max_iters: int = 10_000,
    rng_seed: int = 0,
    sampler: Optional[Callable[[np.random.Generator], tuple]] = None,
    n_pairs: int = 100,
    slack: float = 0.05,
) -> BanachResult:
    """Iterate x -> f(x) until the step is below tol (1 - c).

    The returned radius d(x_n, x_{n+1}) / (1 - c) bounds the distance from
    the last iterate x_{n+1} to the true fixed point (times c, so it is
    conservative). Before iterating, the Lipschitz constant is spot-checked
    on ``n_pairs`` random pairs with ``slack`` allowance; ``sampler`` draws a
    pair of points from a generator and defaults to complex Gaussians around
    x0. The check is a heuristic guard, not a proof.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    c = spec.factor
    if sampler is None:
        _spot_check(spec, x0, rng, n_pairs, slack)
    else:
        for _ in range(n_pairs):
            x, y = sampler(rng)
            dxy = spec.metric(x, y)
            if dxy > 0 and spec.metric(spec.map(x), spec.map(y)) > c * (1 + slack) * dxy:
                raise NotContractiveError(f"Lipschitz check failed at {x}, {y}")

    x = x0
    for n in range(max_iters + 1):
        fx = spec.map(x)
        step = spec.metric(x, fx)
        if step < tol * (1 - c):
            if step == 0:
                return BanachResult(x, n, 0.0)
            # fx is within c * step / (1 - c) of the fixed point
            return BanachResult(fx, n + 1, step / (1 - c))
        x = fx
    raise MaxItersError(f"no convergence within {max_iters} iterations")
