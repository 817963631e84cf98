"""Invariant suites run by ``rvflow verify``.

Every check has an id ``<module>.<n>`` following the order of the module's
invariant list; sub-checks get a letter suffix. Randomized checks draw from
PCG64 seeded by the run seed plus a fixed per-suite offset, so a report is a
pure function of the seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import convergence as cb
from . import hyperbolic as hy
from . import model_flow as mf
from . import pairing as pf
from . import schwarzian as sl
from .integrators import IntegratorConfig, Method


@dataclass
class Failure:
    check_id: str
    expected: str
    got: str
    tolerance: str

    def to_dict(self) -> dict:
        return {"check_id": self.check_id, "expected": self.expected,
                "got": self.got, "tolerance": self.tolerance}


@dataclass
class VerifyReport:
    suite: str
    seed: int
    checks: list[str] = field(default_factory=list)
    failures: list[Failure] = field(default_factory=list)

    @property
    def n_checks(self) -> int:
        return len(self.checks)

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    def check(self, check_id: str, ok: bool, expected, got, tolerance) -> None:
        self.checks.append(check_id)
        if not ok:
            self.failures.append(Failure(check_id, str(expected), str(got), str(tolerance)))

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "n_checks": self.n_checks,
            "n_failed": self.n_failed,
            "checks": list(self.checks),
            "failures": [f.to_dict() for f in self.failures],
        }


def _rng(seed: int, offset: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64([seed, offset]))


def random_in_disk(rng: np.random.Generator, n: int, center: complex = 1.0, radius: float = 1.0) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    a = 2 * np.pi * rng.random(n)
    return center + r * np.exp(1j * a)


def fd_wirtinger(z: complex, h: float = 1e-5) -> tuple[complex, complex]:
    """Central differences of v in x and y, recombined into d/dz, d/dzbar."""
    fx = (mf.eval_v(z + h) - mf.eval_v(z - h)) / (2 * h)
    fy = (mf.eval_v(z + 1j * h) - mf.eval_v(z - 1j * h)) / (2 * h)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def fd_jacobian(z: complex, h: float = 1e-5) -> np.ndarray:
    fx = complex(mf.eval_v(z + h) - mf.eval_v(z - h)) / (2 * h)
    fy = complex(mf.eval_v(z + 1j * h) - mf.eval_v(z - 1j * h)) / (2 * h)
    return np.array([[fx.real, fy.real], [fx.imag, fy.imag]])


def rk4_observed_order(z0: complex = 1.3 + 0.2j, t_end: float = 5.0) -> float:
    def run(dt):
        cfg = IntegratorConfig(method=Method.RK4_FIXED, dt=dt, t_max=t_end, divergence_radius=1e6)
        return mf.integrate(z0, cfg).final

    ref = run(1e-4)
    e1 = abs(run(1e-2) - ref)
    e2 = abs(run(5e-3) - ref)
    return math.log2(e1 / e2)


# --- suites ------------------------------------------------------------------

def suite_model_flow(seed: int) -> VerifyReport:
    rep = VerifyReport("model_flow", seed)
    rng = _rng(seed, 1)

    cs = random_in_disk(rng, 1000)
    err = max(abs(mf.eval_v(c) - c * (pf.F_L(c) - pf.F_ell(c))) for c in cs.tolist())
    rep.check("model_flow.1", err < 1e-12, 0.0, err, "abs 1e-12")

    xs = np.linspace(-3, 4, 400)
    ys = np.linspace(-3, 3, 400)
    Z = xs[None, :] + 1j * ys[:, None]
    mask = np.ones(Z.shape, bool)
    for z0 in mf.ZEROS:
        mask &= np.abs(Z - z0) > 0.1
    vmin = float(np.min(np.abs(mf.eval_v(Z[mask]))))
    rep.check("model_flow.2", vmin > 1e-3, "> 1e-3", vmin, "1e-3")

    theta = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
    radial, horiz = mf.circle_decompose(theta)
    rmax = float(np.max(np.abs(radial)))
    rep.check("model_flow.3", rmax < 1e-12, 0.0, rmax, "abs 1e-12")

    off = np.abs(np.sin(theta)) > 1e-4
    ok = bool(np.all(horiz > -1e-12)) and bool(np.all(horiz[off] > 1e-12))
    at_zeros = max(abs(mf.circle_decompose(0.0)[1]), abs(mf.circle_decompose(math.pi)[1]))
    rep.check("model_flow.4", ok and at_zeros < 1e-12, ">= 0, zero only at 0 and pi",
              f"min off zeros {float(np.min(horiz[off])):.3g}, at zeros {at_zeros:.3g}", "1e-12")

    worst = 0.0
    for z in random_in_disk(rng, 100, 0.5, 2.5).tolist():
        a, b = mf.wirtinger_derivatives(z)
        fa, fb = fd_wirtinger(z)
        worst = max(worst, abs(a - fa) / max(1.0, abs(fa)), abs(b - fb) / max(1.0, abs(fb)))
        jac = mf.real_jacobian(z)
        fj = fd_jacobian(z)
        worst = max(worst, float(np.max(np.abs(jac - fj))) / max(1.0, float(np.max(np.abs(fj)))))
    rep.check("model_flow.5", worst < 1e-6, "finite-difference agreement", worst, "rel 1e-6")

    order = rk4_observed_order()
    rep.check("model_flow.6", order >= 3.8, ">= 3.8", order, "observed order")
    return rep


def suite_schwarzian(seed: int) -> VerifyReport:
    rep = VerifyReport("schwarzian_lab", seed)
    rng = _rng(seed, 2)

    disagreements = []
    n = 0
    while n < 1000:
        c = complex(rng.uniform(0.01, 3.0), rng.uniform(-2.0, 2.0))
        if abs(abs(c - 1) - 1) <= 0.05:
            continue
        n += 1
        a = sl.univalence_criterion(c)
        b = sl.strip_criterion(c)
        e = sl.empirical_injectivity(c, 1000, int(rng.integers(2**32)), 0.05)
        if not a == b == e:
            disagreements.append(c)
    rep.check("schwarzian_lab.1", not disagreements, 0, len(disagreements), "exact agreement")

    worst = 0.0
    for c in (1.3 + 0.4j, 0.5, 2.0, 1.7 - 0.6j):
        g = sl.PowerMapSpec(c)
        pts = [r * np.exp(1j * a) for r, a in zip(rng.uniform(0.5, 2, 10), rng.uniform(np.pi / 6, 5 * np.pi / 6, 10))]
        vals = [sl.schwarzian_numeric(g, z) * z * z for z in pts]
        ref = sl.schwarzian_closed_form(c)
        worst = max(worst, max(abs(v - ref) for v in vals) / abs(ref))
    rep.check("schwarzian_lab.2", worst < 1e-4, "S(g_c) z^2 constant", worst, "rel 1e-4")

    finite = True
    for c in (0, 0.3 + 0.9j, 1.5, 2 - 0.2j):
        g = sl.PowerMapSpec(c)
        ang = np.linspace(1e-6, np.pi - 1e-6, 200)
        z = np.exp(1j * ang) * 1.3
        finite &= bool(np.all(np.isfinite(g(z))))
        finite &= all(np.isfinite(sl.schwarzian_numeric(g, w)) for w in z[::20])
    rep.check("schwarzian_lab.3", finite, "finite", finite, "n/a")
    return rep


def suite_pairing(seed: int) -> VerifyReport:
    rep = VerifyReport("pairing_functionals", seed)
    rng = _rng(seed, 3)

    worst = 0.0
    for c in random_in_disk(rng, 20).tolist():
        for s in (0.5, 1.0, 2.0):
            got = pf.pair_strip(c, pf.AnnulusSpec(s)).value
            exp = pf.pair_strip_exact(c, s)
            worst = max(worst, abs(got - exp) / max(abs(exp), 1e-300))
    rep.check("pairing_functionals.1", worst < 1e-8, "closed form", worst, "rel 1e-8")

    worst = 0.0
    for c in random_in_disk(rng, 5).tolist():
        base = pf.pair_strip(c, pf.AnnulusSpec(0.7)).value
        for k in (2, 3, 5):
            scaled = pf.pair_strip(c, pf.AnnulusSpec(0.7 * k)).value
            worst = max(worst, abs(scaled - k * base) / abs(k * base))
    rep.check("pairing_functionals.2", worst < 1e-10, "k-fold scaling", worst, "rel 1e-10")

    cs = random_in_disk(rng, 1000).tolist()
    err = max(abs(pf.dc_limit(c) - c * (pf.F_L(c) - pf.F_ell(c))) for c in cs)
    rep.check("pairing_functionals.3", err < 1e-12, 0.0, err, "abs 1e-12")

    ok = pf.F_ell(2) == 1.5 and pf.dc_limit(2) == 0
    rep.check("pairing_functionals.4", ok, "F_ell(2)=3/2, dc(2)=0", (pf.F_ell(2), pf.dc_limit(2)), "exact")

    bad = 0
    ells = rng.uniform(0.01, 5, 10_000)
    Ls = rng.uniform(1e-3, 10, 10_000) + 1j * rng.uniform(-8, 8, 10_000)
    for ell, L in zip(ells.tolist(), Ls.tolist()):
        sat, c = pf.bers_region(pf.LengthPair(ell, L))
        if sat != pf.in_closed_disk(c):
            bad += 1
    rep.check("pairing_functionals.5", bad == 0, 0, bad, "exact boolean")
    return rep


def suite_hyperbolic(seed: int) -> VerifyReport:
    rep = VerifyReport("hyperbolic_estimates", seed)
    rng = _rng(seed, 4)
    radii = [0.1 * k for k in range(1, 8)]

    quad = [hy.quotient_disk_area_exact(r) for r in radii]
    closed = [hy.quotient_disk_area_closed(r) for r in radii]
    bound = [hy.quotient_disk_area_bound(math.log(1 / r)) for r in radii]
    rel_q = max(abs(q - c) / c for q, c in zip(quad, closed))
    rep.check("hyperbolic_estimates.1a", rel_q < 1e-4, "quadrature = 4 pi r^2/(1-r^2)^2", rel_q, "rel 1e-4")
    rel_c = max(abs(c - b) / b for c, b in zip(closed, bound))
    rep.check("hyperbolic_estimates.1b", rel_c < 1e-12, "4 pi r^2/(1-r^2)^2 = pi/sinh^2 log(1/r)", rel_c, "rel 1e-12")
    rel_s = max(abs(q - hy.quotient_disk_area_series(r)) / q for q, r in zip(quad, radii))
    below = all(q <= b for q, b in zip(quad, bound))
    rep.check("hyperbolic_estimates.1c", rel_s < 1e-8 and below,
              "quadrature = 4 pi artanh(r^2) <= pi/sinh^2(d)", rel_s, "rel 1e-8")

    ds = np.concatenate([[0.0], np.logspace(-6, math.log10(20), 200)])
    ok = all(hy.visual_area_exact(d) >= hy.visual_area_lower_bound(d) for d in ds)
    ratio_err = max(abs(hy.visual_area_exact(d) / hy.visual_area_lower_bound(d) - 4 / (1 + math.exp(-2 * d)))
                    for d in ds)
    rep.check("hyperbolic_estimates.2", ok and ratio_err < 1e-12, "ratio 4/(1+e^-2d)", ratio_err, "1e-12")

    inv = max(abs(hy.lambert_quadrilateral(hy.lambert_quadrilateral(d)) - d) for d in np.linspace(0.05, 5, 200))
    rep.check("hyperbolic_estimates.3", inv < 1e-12, 0.0, inv, "1e-12")

    worst = 0.0
    for _ in range(1000):
        g = hy.LoxodromicCyclicGroup(rng.uniform(0.05, 3), rng.uniform(-4, 4))
        n = int(rng.integers(-6, 7))
        r = rng.uniform(0, 2)
        worst = max(worst, abs(hy.loxodromic_displacement(g, n, r) - hy.loxodromic_displacement_matrix(g, n, r)))
    rep.check("hyperbolic_estimates.4", worst < 1e-9, "matrix oracle", worst, "1e-9")

    err = max(abs(hy.poincare_series_cyclic(hy.LoxodromicCyclicGroup(t), 0.0) - 1 / math.tanh(t))
              for t in (0.25, 0.5, 1, 2, 4))
    under = all(hy.poincare_series_cyclic(hy.LoxodromicCyclicGroup(t), 0.0) <= hy.poincare_bound(t / 2)
                for t in (0.25, 0.5, 1, 2, 4))
    rep.check("hyperbolic_estimates.5", err < 1e-10 and under, "coth t, <= 8 coth^2(t/2)", err, "1e-10")

    ts = np.linspace(0.1, 5, 50)
    vals = [hy.poincare_series_cyclic(hy.LoxodromicCyclicGroup(t, 0.7), 0.0) for t in ts]
    dec = all(a > b for a, b in zip(vals, vals[1:]))
    theta_free = max(abs(hy.poincare_series_cyclic(hy.LoxodromicCyclicGroup(1.0, th), 0.0) - 1 / math.tanh(1.0))
                     for th in np.linspace(-3, 3, 13))
    rep.check("hyperbolic_estimates.6", dec and theta_free < 1e-12, "decreasing in t, constant in theta",
              theta_free, "1e-12")

    worst = 0.0
    for _ in range(100):
        spec = hy.CoreNeighborhoodSpec(rng.uniform(0, 10), rng.uniform(0, 50), rng.uniform(0, 3))
        a = hy.neighborhood_volume(spec)
        b = hy.neighborhood_volume_numeric(spec)
        worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    rep.check("hyperbolic_estimates.7", worst < 1e-8, "quadrature", worst, "rel 1e-8")
    return rep


def suite_convergence(seed: int) -> VerifyReport:
    rep = VerifyReport("convergence_bounds", seed)
    rng = _rng(seed, 5)

    bad = 0
    for i in range(100):
        k = rng.uniform(0.05, 0.9)
        rot = np.exp(1j * rng.uniform(0, 2 * np.pi))
        p = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        spec = cb.ContractionSpec(k, lambda z, k=k, rot=rot, p=p: p + k * rot * (z - p))
        x0 = complex(rng.uniform(-20, 20), rng.uniform(-20, 20))
        res = cb.banach_iterate(spec, x0, tol=1e-10, rng_seed=i)
        if not abs(res.fixed_point - p) <= res.certified_radius or res.certified_radius > 1e-10:
            bad += 1
    rep.check("convergence_bounds.1", bad == 0, 0, bad, "certified radius")

    ks = np.linspace(0, 0.49, 200)
    vals = np.array([cb.ahlfors_weill_bound(k) for k in ks])
    mono = bool(np.all(np.diff(vals) > 0))
    convex = bool(np.all(np.diff(vals, 2) >= -1e-14))
    rep.check("convergence_bounds.2", mono and convex, "increasing, convex", (mono, convex), "finite differences")

    # sup norm 1/2 sits on the Ahlfors-Weill pole; the chain is infinite there
    chain = [cb.chained_tail_bound(2.0**-k, 0.5) if k > 1 else math.inf for k in range(1, 21)]
    ok = all(a > b for a, b in zip(chain, chain[1:])) and chain[-1] < 1e-5
    rep.check("convergence_bounds.3", ok, "-> 0", chain[-1], "decreasing, < 1e-5 at k=20")
    return rep


def suite_cli(seed: int) -> VerifyReport:
    from . import cli

    rep = VerifyReport("cli", seed)
    argvs = [
        ["geom", "poincare", "--t", "1", "--r", "0"],
        ["flow", "--z0", "0.3+0.2i", "--target", "1"],
        ["pair", "strip", "--c", "1.3+0.4i", "--s", "1"],
    ]
    same = True
    for argv in argvs:
        a = cli.run_capture(argv)
        b = cli.run_capture(argv)
        same &= a == b
    rep.check("cli.1", same, "byte-identical", same, "exact")
    return rep


SUITES: list[tuple[str, Callable[[int], VerifyReport]]] = sorted([
    ("model_flow", suite_model_flow),
    ("schwarzian_lab", suite_schwarzian),
    ("pairing_functionals", suite_pairing),
    ("hyperbolic_estimates", suite_hyperbolic),
    ("convergence_bounds", suite_convergence),
    ("cli", suite_cli),
])

EXPECTED_IDS = {
    "suite_model_flow": [f"model_flow.{i}" for i in range(1, 7)],
    "suite_schwarzian": [f"schwarzian_lab.{i}" for i in range(1, 4)],
    "suite_pairing": [f"pairing_functionals.{i}" for i in range(1, 6)],
    "suite_hyperbolic": ["hyperbolic_estimates.1a", "hyperbolic_estimates.1b", "hyperbolic_estimates.1c"]
    + [f"hyperbolic_estimates.{i}" for i in range(2, 8)],
    "suite_convergence": [f"convergence_bounds.{i}" for i in range(1, 4)],
    "suite_cli": ["cli.1", "cli.2"],
}


def _coverage_check(reports: list[VerifyReport]) -> None:
    """cli.2: every expected check id was emitted by some suite."""
    emitted = {cid for r in reports for cid in r.checks}
    expected = {cid for ids in EXPECTED_IDS.values() for cid in ids} - {"cli.2"}
    missing = sorted(expected - emitted)
    cli_rep = next(r for r in reports if r.suite == "cli")
    cli_rep.check("cli.2", not missing, "all invariants covered", missing or "none missing", "n/a")


def run_suites(name: str = "all", seed: int = 0) -> dict:
    names = [n for n, _ in SUITES]
    if name != "all" and name not in names:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(['all', *names])}")
    reports = [fn(seed) for n, fn in SUITES if name in ("all", n)]
    if name == "all":
        _coverage_check(reports)
    if len(reports) == 1:
        return reports[0].to_dict()
    failures = [f for r in reports for f in r.failures]
    return {
        "suite": "all",
        "seed": seed,
        "n_checks": sum(r.n_checks for r in reports),
        "n_failed": len(failures),
        "failures": [f.to_dict() for f in failures],
        "suites": [r.to_dict() for r in reports],
    }
