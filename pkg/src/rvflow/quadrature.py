"""Adaptive Gauss-Legendre quadrature on intervals and rectangles.

Panels are bisected until the fine/coarse estimates agree to a share of the
global tolerance proportional to the panel's size. Accepted panel values are
sorted by position and combined by pairwise (tree) summation, so the result
does not depend on the order in which panels were visited.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureNotConvergedError


@dataclass(frozen=True)
class QuadConfig:
    order: int = 10
    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_depth: int = 30
    max_panels: int = 200_000

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("order must be >= 2")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class QuadResult:
    value: complex
    est_error: float
    n_evals: int


@lru_cache(maxsize=None)
def _nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def pairwise_sum(values: Sequence[complex]) -> complex:
    """Sum by recursive halving; deterministic for a fixed input order."""
    n = len(values)
    if n == 0:
        return 0.0
    if n <= 8:
        total = values[0]
        for v in values[1:]:
            total = total + v
        return total
    mid = n // 2
    return pairwise_sum(values[:mid]) + pairwise_sum(values[mid:])


def _gl_1d(f, a, b, order):
    x, w = _nodes(order)
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b) + half * x
    return half * np.sum(w * f(pts))


def _gl_2d(f, x0, x1, y0, y1, order):
    x, w = _nodes(order)
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    X, Y = np.meshgrid(0.5 * (x0 + x1) + hx * x, 0.5 * (y0 + y1) + hy * x, indexing="ij")
    W = np.outer(w, w)
    return hx * hy * np.sum(W * f(X, Y))


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadConfig = QuadConfig(),
    breakpoints: Sequence[float] = (),
) -> QuadResult:
    """Integrate a vectorized ``f`` over ``[a, b]``.

    ``breakpoints`` seed the initial panel partition, e.g. geometric
    refinement toward an endpoint where the integrand grows quickly.
    """
    edges = sorted({float(a), float(b), *(float(p) for p in breakpoints if a < p < b)})
    total_len = float(b - a)
    q = cfg.order
    coarse = [_gl_1d(f, lo, hi, q) for lo, hi in zip(edges[:-1], edges[1:])]
    n_evals = q * len(coarse)
    scale = abs(pairwise_sum(coarse))
    tol = max(cfg.abs_tol, cfg.rel_tol * scale)

    accepted: list[tuple[float, complex, float]] = []
    stack = [(lo, hi, c, 0) for lo, hi, c in zip(edges[:-1], edges[1:], coarse)]
    failed = False
    while stack:
        lo, hi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gl_1d(f, lo, mid, q)
        right = _gl_1d(f, mid, hi, q)
        n_evals += 2 * q
        fine = left + right
        diff = abs(fine - est)
        share = tol * (hi - lo) / total_len
        if diff <= share:
            accepted.append((lo, fine, diff))
            continue
        if depth >= cfg.max_depth or len(stack) + len(accepted) > cfg.max_panels:
            failed = True
            accepted.append((lo, fine, diff))
            continue
        stack.append((lo, mid, left, depth + 1))
        stack.append((mid, hi, right, depth + 1))

    accepted.sort(key=lambda p: p[0])
    value = pairwise_sum([p[1] for p in accepted])
    err = float(sum(p[2] for p in accepted))
    if failed and err > tol:
        raise QuadratureNotConvergedError(
            f"1D quadrature did not reach tolerance {tol:.3g} (est. error {err:.3g})"
        )
    return QuadResult(complex(value), err, n_evals)


def integrate_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    cfg: QuadConfig = QuadConfig(),
    x_breaks: Sequence[float] = (),
    y_breaks: Sequence[float] = (),
) -> QuadResult:
    """Tensor-product adaptive Gauss-Legendre over a rectangle.

    Each rectangle is compared against the sum of its four children and
    split until the difference falls under its area share of the tolerance.
    """
    x0, x1 = map(float, x_range)
    y0, y1 = map(float, y_range)
    xe = sorted({x0, x1, *(float(p) for p in x_breaks if x0 < p < x1)})
    ye = sorted({y0, y1, *(float(p) for p in y_breaks if y0 < p < y1)})
    area = (x1 - x0) * (y1 - y0)
    q = cfg.order

    cells = []
    for a, b in zip(xe[:-1], xe[1:]):
        for c, d in zip(ye[:-1], ye[1:]):
            cells.append((a, b, c, d, _gl_2d(f, a, b, c, d, q), 0))
    n_evals = q * q * len(cells)
    scale = abs(pairwise_sum([c[4] for c in cells]))
    tol = max(cfg.abs_tol, cfg.rel_tol * scale)

    accepted: list[tuple[float, float, complex, float]] = []
    stack = cells
    failed = False
    while stack:
        a, b, c, d, est, depth = stack.pop()
        xm = 0.5 * (a + b)
        ym = 0.5 * (c + d)
        kids = [
            (a, xm, c, ym),
            (a, xm, ym, d),
            (xm, b, c, ym),
            (xm, b, ym, d),
        ]
        vals = [_gl_2d(f, *k, q) for k in kids]
        n_evals += 4 * q * q
        fine = pairwise_sum(vals)
        diff = abs(fine - est)
        share = tol * (b - a) * (d - c) / area
        if diff <= share:
            accepted.append((a, c, fine, diff))
            continue
        if depth >= cfg.max_depth or len(stack) + len(accepted) > cfg.max_panels:
            failed = True
            accepted.append((a, c, fine, diff))
            continue
        for k, v in zip(kids, vals):
            stack.append((*k, v, depth + 1))

    accepted.sort(key=lambda p: (p[0], p[1]))
    value = pairwise_sum([p[2] for p in accepted])
    err = float(sum(p[3] for p in accepted))
    if failed and err > tol:
        raise QuadratureNotConvergedError(
            f"2D quadrature did not reach tolerance {tol:.3g} (est. error {err:.3g})"
        )
    return QuadResult(complex(value), err, n_evals)
