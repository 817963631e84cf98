"""Command-line front end: ``rvflow <subcommand> ...``.

Data goes to stdout (or files); the fully-resolved configuration of every
run is echoed to stderr as one ``# config {...}`` JSON line. Exit codes: 0
on success, 1 when a verification check fails, 2 on usage or domain errors.

Defaults can come from a ``key=value`` file given by ``--config``; flags on
the command line override it. ``RVFLOW_OUTPUT_DIR`` sets the default
directory for files written by ``portrait``.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import math
import os
import re
import sys
from pathlib import Path
from typing import Any, Callable, Optional

from . import convergence as cb
from . import hyperbolic as hy
from . import model_flow as mf
from . import pairing as pf
from . import schwarzian as sl
from .errors import RVFlowError
from .integrators import IntegratorConfig, Method

OUTPUT_DIR_ENV = "RVFLOW_OUTPUT_DIR"

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL_RE = re.compile(rf"^[+-]?{_NUM}$")
_IMAG_RE = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)i$")
_FULL_RE = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?)i$")


class UsageError(Exception):
    pass


def _imag(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` / ``a-bi`` / ``a`` / ``bi`` (no spaces)."""
    if _REAL_RE.match(text):
        return complex(float(text), 0.0)
    m = _IMAG_RE.match(text)
    if m:
        return complex(0.0, _imag(m.group("im")))
    m = _FULL_RE.match(text)
    if m:
        return complex(float(m.group("re")), _imag(m.group("im")))
    raise argparse.ArgumentTypeError(f"invalid complex number {text!r}; use a+bi with no spaces")


def format_complex(z: complex) -> str:
    sign = "-" if z.imag < 0 or (z.imag == 0 and math.copysign(1, z.imag) < 0) else "+"
    return f"{z.real:.17g}{sign}{abs(z.imag):.17g}i"


def _cjson(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _mobius(text: str) -> sl.MobiusTransform:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("Mobius map must be four complex numbers a,b,c,d")
    try:
        return sl.MobiusTransform.from_coeffs(*(parse_complex(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# --- option groups -------------------------------------------------------------

_DEFAULTS: dict[str, Any] = {}


def _opt(p: argparse.ArgumentParser, flag: str, default=None, **kw):
    dest = flag.lstrip("-").replace("-", "_")
    _DEFAULTS.setdefault(p.prog, {})[dest] = (default, kw.get("type"))
    p.add_argument(flag, default=None, **kw)


def _integrator_opts(p):
    _opt(p, "--method", "rk45", choices=["rk4", "rk45"])
    _opt(p, "--dt", 1e-2, type=float)
    _opt(p, "--abs-tol", 1e-9, type=float)
    _opt(p, "--rel-tol", 1e-9, type=float)
    _opt(p, "--t-max", 200.0, type=float)
    _opt(p, "--convergence-radius", 1e-7, type=float)
    _opt(p, "--divergence-radius", 50.0, type=float)


def _box_opts(p, box):
    for flag, val in zip(("--re-min", "--re-max", "--im-min", "--im-max"), box):
        _opt(p, flag, val, type=float)


def _format_opt(p, default="plain"):
    _opt(p, "--format", default, choices=["json", "plain"])


def _cfg(a) -> IntegratorConfig:
    return IntegratorConfig(
        method=Method.RK4_FIXED if a.method == "rk4" else Method.RK45_ADAPTIVE,
        dt=a.dt, abs_tol=a.abs_tol, rel_tol=a.rel_tol, t_max=a.t_max,
        convergence_radius=a.convergence_radius, divergence_radius=a.divergence_radius,
    )


def _box(a) -> mf.Box:
    return mf.Box(a.re_min, a.re_max, a.im_min, a.im_max)


# --- handlers ------------------------------------------------------------------

def _emit_number(a, value, formula_id: str, inputs: dict) -> str:
    if a.format == "json":
        if isinstance(value, complex):
            value = _cjson(value)
        return json.dumps({"value": value, "inputs": inputs, "formula_id": formula_id}, sort_keys=True)
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, bool):
        return str(value).lower()
    return f"{value:.17g}"


def cmd_flow(a) -> tuple[int, str]:
    cfg = _cfg(a)
    if a.noise_amplitude:
        amp, decay = a.noise_amplitude, a.noise_decay
        traj = mf.perturbed_integrate(a.z0, lambda t: amp * math.exp(-decay * t), a.seed, cfg)
    else:
        traj = mf.integrate(a.z0, cfg, a.target)
    text = traj.to_csv()
    if a.out:
        Path(a.out).write_text(text)
        return 0, json.dumps({"written": a.out, "terminal_status": traj.terminal_status.value})
    return 0, text.rstrip("\n")


def _raster(grid: mf.GridSpec, cfg: IntegratorConfig, workers: int) -> mf.BasinRaster:
    if grid.nx >= 2 and grid.ny >= 2:
        return mf.basin_sample(grid, cfg, workers)
    xs, ys = grid.axes()
    labels = [[mf.fate(complex(x, y), cfg) for x in xs] for y in ys]
    return mf.BasinRaster(grid, xs, ys, labels)


def cmd_portrait(a) -> tuple[int, str]:
    grid = mf.GridSpec(_box(a), a.nx, a.ny)
    out_dir = Path(a.out_dir or os.environ.get(OUTPUT_DIR_ENV, "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    svg_path = out_dir / f"{a.name}.svg"
    csv_path = out_dir / f"{a.name}.csv"
    svg_path.write_text(mf.portrait_svg(grid))
    raster = _raster(grid, _cfg(a), a.workers)
    csv_path.write_text(raster.to_csv())
    return 0, json.dumps({"svg": str(svg_path), "csv": str(csv_path)}, sort_keys=True)


def cmd_fixed_points(a) -> tuple[int, str]:
    failures: list = []
    reports = mf.find_fixed_points(_box(a), a.grid_n, failures)
    return 0, json.dumps({
        "fixed_points": [r.to_dict() for r in reports],
        "n_failed_seeds": len(failures),
    }, sort_keys=True)


def cmd_schwarzian(a) -> tuple[int, str]:
    v = a.verb
    if v == "closed-form":
        out = {"C": _cjson(sl.schwarzian_closed_form(a.c))}
    elif v == "numeric":
        g = sl.PowerMapSpec(a.c)
        f = sl.Composed(a.mobius, g) if a.mobius is not None else g
        num = sl.schwarzian_numeric(f, a.z, a.h)
        out = {"S": _cjson(num), "closed_form": _cjson(sl.schwarzian_closed_form(a.c) / a.z**2)}
    elif v == "univalent":
        length = sl.strip_intersection_length(a.c)
        out = {
            "c": _cjson(a.c),
            "disk": sl.univalence_criterion(a.c),
            "strip_length": None if math.isinf(length) else length,
            "strip": sl.strip_criterion(a.c),
            "empirical": sl.empirical_injectivity(a.c, a.n_samples, a.seed, a.margin),
            "seed": a.seed,
        }
    elif v == "mobius-check":
        m = a.mobius if a.mobius is not None else sl.MobiusTransform.identity()
        out = {"defect": sl.mobius_invariance_check(a.c, m, a.z, a.h)}
    else:  # s-invariance
        out = {"defect": sl.s_invariance_check(a.coef, a.s, a.z)}
    return 0, json.dumps(out, sort_keys=True)


def cmd_pair(a) -> tuple[int, str]:
    v = a.verb
    if v == "strip":
        return 0, json.dumps(pf.pair_strip(a.c, pf.AnnulusSpec(a.s)).to_dict(), sort_keys=True)
    if v == "pullback":
        return 0, json.dumps(pf.pair_pullback(a.c, a.s).to_dict(), sort_keys=True)
    if v == "f-ell":
        out = {"F_ell": pf.F_ell(a.c)}
    elif v == "f-l":
        out = {"F_L": _cjson(pf.F_L(a.c))}
    elif v == "dc":
        out = {"dc": _cjson(pf.dc_limit(a.c))}
    elif v == "bers":
        sat, c = pf.bers_region(pf.LengthPair(a.ell, a.L))
        out = {"satisfies": sat, "c": _cjson(c)}
    else:  # aux
        out = {"bound": pf.aux_term_bound(a.eta, a.re_l)}
    return 0, json.dumps(out, sort_keys=True)


_GEOM: dict[str, tuple[list[tuple[str, Any, Any]], Callable, str]] = {
    "tube-area": ([("--R", None, float), ("--re-l", None, float)],
                  lambda a: hy.tube_boundary_area(a.R, a.re_l), "pi*sinh(2R)*ReL"),
    "min-length": ([("--epsilon", None, float), ("--R", None, float)],
                   lambda a: hy.min_length_bound(a.epsilon, a.R), "eps^2/sinh(2R)"),
    "disk-area": ([("--r", None, float)], lambda a: hy.quotient_disk_area_exact(a.r),
                  "quadrature of 4/|z^2-1|^2 over |z|<r"),
    "disk-area-bound": ([("--d", None, float)], lambda a: hy.quotient_disk_area_bound(a.d), "pi/sinh^2(d)"),
    "visual-area": ([("--d", None, float)], lambda a: hy.visual_area_exact(a.d), "2*pi*(1-tanh d)"),
    "proj-bound": ([("--epsilon", None, float)],
                   lambda a: hy.projection_halfspace_distance_bound(a.epsilon), "log(2*coth eps)"),
    "lambert": ([("--d1", None, float)], lambda a: hy.lambert_quadrilateral(a.d1), "asinh(1/sinh d1)"),
    "shadow-distance": ([("--R", None, float), ("--ell-u", None, float)],
                        lambda a: hy.halfspace_shadow_distance(a.R, a.ell_u), "R+ell(u)-log(1+sqrt2)"),
    "shadow-area": ([("--R", None, float), ("--ell-u", None, float)],
                    lambda a: hy.shadow_area_bound(a.R, a.ell_u), "16*pi*exp(-2d)"),
    "displacement": ([("--t", None, float), ("--theta", 0.0, float), ("--n", None, int), ("--r", 0.0, float)],
                     lambda a: hy.loxodromic_displacement(hy.LoxodromicCyclicGroup(a.t, a.theta), a.n, a.r),
                     "acosh(cosh^2 r cosh nt - sinh^2 r cos n theta)"),
    "poincare": ([("--t", None, float), ("--theta", 0.0, float), ("--r", 0.0, float), ("--tail-tol", 1e-16, float)],
                 lambda a: hy.poincare_series_cyclic(hy.LoxodromicCyclicGroup(a.t, a.theta), a.r, a.tail_tol),
                 "sum_n exp(-2 d(x, g^n x))"),
    "orthosum": ([("--N", None, int), ("--D", None, float), ("--P", None, float)],
                 lambda a: hy.orthosum_bound(a.N, a.D, a.P), "N*exp(2D)*P"),
    "nbhd-area": ([("--chi", None, float), ("--bending", 0.0, float), ("--t", None, float)],
                  lambda a: hy.neighborhood_boundary_area(hy.CoreNeighborhoodSpec(a.chi, a.bending, a.t)),
                  "2*pi*|chi|*cosh^2 t + L*sinh t*cosh t"),
    "nbhd-volume": ([("--chi", None, float), ("--bending", 0.0, float), ("--eps", None, float)],
                    lambda a: hy.neighborhood_volume(hy.CoreNeighborhoodSpec(a.chi, a.bending, a.eps)),
                    "2*pi*|chi|*(eps/2+sinh(2eps)/4) + L*sinh^2(eps)/2"),
    "bending-bound": ([("--chi", None, float), ("--delta", None, float), ("--A", None, float), ("--B", None, float)],
                      lambda a: hy.bending_length_bound(a.chi, a.delta, a.A, a.B), "(A+B/delta)*|chi|"),
}


def cmd_geom(a) -> tuple[int, str]:
    opts, fn, formula = _GEOM[a.verb]
    inputs = {flag.lstrip("-").replace("-", "_"): getattr(a, flag.lstrip("-").replace("-", "_"))
              for flag, _, _ in opts}
    return 0, _emit_number(a, fn(a), f"geom.{a.verb}: {formula}", inputs)


def cmd_converge(a) -> tuple[int, str]:
    v = a.verb
    if v == "ahlfors-weill":
        cert = cb.Certificate(cb.ahlfors_weill_bound(a.k), {"k": a.k}, "0.5*log((1+2k)/(1-2k))")
    elif v == "tail":
        cert = cb.Certificate(cb.contraction_tail_bound(a.d, a.c), {"d_first_step": a.d, "c": a.c}, "d/(1-c)")
    elif v == "wolpert":
        budget = cb.NormBudget(a.sup_norm, a.l2_norm, a.deriv, a.wolpert_c)
        if a.contraction is None:
            cert = cb.Certificate(cb.wolpert_sup_bound(budget),
                                  {"l2_norm": a.l2_norm, "max_log_length_deriv": a.deriv,
                                   "wolpert_c": a.wolpert_c}, "c*(deriv/2+l2)")
        else:
            cert = cb.wolpert_chain(budget, a.contraction)
    else:  # banach: affine contraction z -> p + factor*(z - p)
        p = a.center
        spec = cb.ContractionSpec(a.factor, lambda z: p + a.factor * (z - p))
        res = cb.banach_iterate(spec, a.x0, a.tol, rng_seed=a.seed)
        cert = cb.Certificate(res.certified_radius,
                              {"factor": a.factor, "center": _cjson(p), "x0": _cjson(a.x0), "tol": a.tol,
                               "fixed_point": _cjson(complex(res.fixed_point)), "n_iters": res.n_iters},
                              "banach: step/(1-c)")
    out = cert.to_dict()
    if isinstance(out["bound"], float) and math.isinf(out["bound"]):
        out["bound"] = None
    return 0, json.dumps(out, sort_keys=True)


def cmd_verify(a) -> tuple[int, str]:
    from .verify import run_suites

    try:
        report = run_suites(a.suite, a.seed)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    return (1 if report["n_failed"] else 0), json.dumps(report, sort_keys=True, indent=1)


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    _DEFAULTS.clear()
    p = _Parser(prog="rvflow", description="Model-flow laboratory")
    p.add_argument("--config", help="key=value file of default flag values")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("flow", help="integrate z' = v(z) and print a t,re,im CSV")
    _opt(f, "--z0", type=parse_complex, required=False)
    _opt(f, "--target", type=parse_complex)
    _integrator_opts(f)
    _opt(f, "--noise-amplitude", 0.0, type=float)
    _opt(f, "--noise-decay", 1.0, type=float)
    _opt(f, "--seed", 0, type=int)
    _opt(f, "--out")
    f.set_defaults(handler=cmd_flow, required=("z0",))

    pp = sub.add_parser("portrait", help="arrow field SVG plus basin CSV raster")
    _box_opts(pp, (-0.5, 2.5, -1.5, 1.5))
    _opt(pp, "--nx", 25, type=int)
    _opt(pp, "--ny", 25, type=int)
    _integrator_opts(pp)
    _opt(pp, "--out-dir")
    _opt(pp, "--name", "portrait")
    _opt(pp, "--workers", 1, type=int)
    pp.set_defaults(handler=cmd_portrait, required=())

    fp = sub.add_parser("fixed-points", help="Newton search for zeros of v")
    _box_opts(fp, (-2.0, 3.0, -2.0, 2.0))
    _opt(fp, "--grid-n", 40, type=int)
    fp.set_defaults(handler=cmd_fixed_points, required=())

    sc = sub.add_parser("schwarzian", help="power-map Schwarzian and univalence tests")
    sc_sub = sc.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    specs = {
        "closed-form": [("--c", None, parse_complex)],
        "numeric": [("--c", None, parse_complex), ("--z", 1j, parse_complex), ("--h", None, float),
                    ("--mobius", None, _mobius)],
        "univalent": [("--c", None, parse_complex), ("--n-samples", 10_000, int), ("--seed", 0, int),
                      ("--margin", 0.05, float)],
        "mobius-check": [("--c", None, parse_complex), ("--mobius", None, _mobius), ("--z", 1j, parse_complex),
                         ("--h", None, float)],
        "s-invariance": [("--coef", None, parse_complex), ("--s", None, float), ("--z", 1j, parse_complex)],
    }
    _add_verbs(sc_sub, specs, cmd_schwarzian)

    pa = sub.add_parser("pair", help="pairings and limit functionals")
    pa_sub = pa.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    specs = {
        "strip": [("--c", None, parse_complex), ("--s", 1.0, float)],
        "pullback": [("--c", None, parse_complex), ("--s", 1.0, float)],
        "f-ell": [("--c", None, parse_complex)],
        "f-l": [("--c", None, parse_complex)],
        "dc": [("--c", None, parse_complex)],
        "bers": [("--ell", None, float), ("--L", None, parse_complex)],
        "aux": [("--eta", None, float), ("--re-l", None, float)],
    }
    _add_verbs(pa_sub, specs, cmd_pair)

    ge = sub.add_parser("geom", help="hyperbolic-geometry calculators")
    ge_sub = ge.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, (opts, _, _) in _GEOM.items():
        vp = ge_sub.add_parser(verb)
        for flag, default, typ in opts:
            _opt(vp, flag, default, type=typ)
        _format_opt(vp)
        vp.set_defaults(handler=cmd_geom, required=tuple(
            flag.lstrip("-").replace("-", "_") for flag, d, _ in opts if d is None))

    co = sub.add_parser("converge", help="contraction and distance certificates")
    co_sub = co.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    specs = {
        "ahlfors-weill": [("--k", None, float)],
        "tail": [("--d", None, float), ("--c", None, float)],
        "wolpert": [("--sup-norm", 0.0, float), ("--l2-norm", 0.0, float), ("--deriv", 0.0, float),
                    ("--wolpert-c", 1.0, float), ("--contraction", None, float)],
        "banach": [("--factor", None, float), ("--center", 0j, parse_complex), ("--x0", None, parse_complex),
                   ("--tol", 1e-12, float), ("--seed", 0, int)],
    }
    _add_verbs(co_sub, specs, cmd_converge, optional={"contraction"})

    ve = sub.add_parser("verify", help="run invariant suites")
    ve.add_argument("suite", nargs="?", default="all")
    _opt(ve, "--seed", 0, type=int)
    ve.set_defaults(handler=cmd_verify, required=())
    return p


def _add_verbs(sub, specs, handler, optional=frozenset()):
    for verb, opts in specs.items():
        vp = sub.add_parser(verb)
        for flag, default, typ in opts:
            _opt(vp, flag, default, type=typ)
        vp.set_defaults(handler=handler, required=tuple(
            d for d in (flag.lstrip("-").replace("-", "_") for flag, default, _ in opts if default is None)
            if d not in optional and d not in {"target", "h", "mobius"}))


def _read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _resolve(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    a = parser.parse_args(argv)
    prog = _find_prog(parser, a)
    table = _DEFAULTS.get(prog, {})
    cfg_file = _read_config(a.config) if a.config else {}
    unknown = set(cfg_file) - set(table)
    if unknown:
        raise UsageError(f"unknown config keys for {prog}: {', '.join(sorted(unknown))}")
    for dest, (default, typ) in table.items():
        if getattr(a, dest) is not None:
            continue
        if dest in cfg_file:
            raw = cfg_file[dest]
            try:
                val = typ(raw) if typ else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad config value {dest}={raw!r}: {exc}") from exc
            setattr(a, dest, val)
        else:
            setattr(a, dest, default)
    missing = [d for d in getattr(a, "required", ()) if getattr(a, d, None) is None]
    if missing:
        raise UsageError(f"{prog}: missing required option(s): "
                         + ", ".join("--" + m.replace("_", "-") for m in missing))
    return a


def _find_prog(parser, a) -> str:
    prog = f"rvflow {a.command}"
    if getattr(a, "verb", None):
        prog += f" {a.verb}"
    return prog


def _config_echo(a) -> str:
    items = {}
    for k, v in sorted(vars(a).items()):
        if k in ("handler", "required"):
            continue
        if isinstance(v, complex):
            v = format_complex(v)
        elif isinstance(v, sl.MobiusTransform):
            v = [format_complex(complex(x)) for x in (v.a, v.b, v.c, v.d)]
        elif isinstance(v, float) and not math.isfinite(v):
            v = str(v)
        items[k] = v
    return "# config " + json.dumps(items, sort_keys=True)


def run(argv: Optional[list[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        a = _resolve(parser, list(sys.argv[1:] if argv is None else argv))
        print(_config_echo(a), file=stderr)
        code, text = a.handler(a)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return 2
    except (RVFlowError, ValueError) as exc:
        print(f"rvflow: error: {exc}", file=stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if text:
        print(text, file=stdout)
    return code


def run_capture(argv: list[str]) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
