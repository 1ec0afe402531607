"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input rejection.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import field as fld
from . import oracle
from . import radial
from . import special_fn as sf
from ._parallel import ordered_map
from .errors import (
    AccuracyError,
    AdmissibilityError,
    ConvergenceError,
    DataError,
    DomainError,
    NotResonantError,
    RegularityError,
    ResonanceError,
)
from .spherics import sphere_area

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_REJECT = 2

MAX_DEGREE_CAP = 64
DEFAULT_RADII = [10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0]
TEST_LAMBDAS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(3, 2))
TEST_DIMS = (2, 3, 4, 6)

_INPUT_ERRORS = (
    AdmissibilityError,
    RegularityError,
    DataError,
    DomainError,
    ResonanceError,
    NotResonantError,
    AccuracyError,
    ConvergenceError,
    OverflowError,
    json.JSONDecodeError,
    OSError,
)


class InputError(Exception):
    """Raised for malformed command-line or config input."""


def _fmt(v):
    if v == 0 or (1e-3 <= abs(v) < 1e6):
        return f"{v:.10f}"
    return f"{v:.10e}"


def parse_lambda(text):
    """'1/4', '0.5', '2' or a {num, den} mapping, as an exact Fraction."""
    if isinstance(text, dict):
        return Fraction(int(text["num"]), int(text["den"]))
    return Fraction(str(text))


# ---------------------------------------------------------------- kummer

def kummer_table(a, b, x, regime="auto"):
    """Evaluate M(a, b; x) and report the regime used.

    The asymptotic regime applies to large negative x.  Returns a dict with
    ``value``, ``regime`` and, when both regimes apply, ``series``,
    ``asymptotic`` and ``relative_delta``.
    """
    p = sf.KummerParams(a, b)
    out = {}
    asym_ok = x < 0 and not sf._is_nonpositive_integer(b - a)

    def asymptotic():
        factor, _ = sf.optimal_asymptotic_factor(a, b, -x)
        return (-x) ** (-a) * sf.gamma_ratio(b, b - a) * factor

    if regime == "asymptotic" and not asym_ok:
        raise DomainError("the asymptotic regime needs x < 0 and b - a not a nonpositive integer")
    if regime == "auto":
        regime = "series"
        if asym_ok and -x > radial.X_SWITCH:
            _, err = sf.optimal_asymptotic_factor(a, b, -x)
            if err <= radial.ASYMPTOTIC_REL_TOL:
                regime = "asymptotic"
    out["regime"] = regime
    out["value"] = asymptotic() if regime == "asymptotic" else sf.kummer_series(p, x)
    if asym_ok:
        s = sf.kummer_series(p, x)
        v = asymptotic()
        out["series"] = s
        out["asymptotic"] = v
        out["relative_delta"] = abs(s - v) / abs(s) if s != 0 else math.inf
    return out


def cmd_kummer(args):
    t = kummer_table(args.a, args.b, args.x, args.regime)
    print(f"M({args.a:g}, {args.b:g}; {args.x:g}) = {_fmt(t['value'])}  [regime: {t['regime']}]")
    if args.compare:
        if "series" not in t:
            print("compare: only the series regime applies at this x")
        else:
            print(f"series     = {_fmt(t['series'])}")
            print(f"asymptotic = {_fmt(t['asymptotic'])}")
            print(f"relative delta = {t['relative_delta']:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------- construct

def preset_trace(name, m, max_degree):
    """Coefficient map for a named preset: phi{l}, smooth{n} or constant."""
    if name == "constant":
        return {0: math.sqrt(sphere_area(m - 1))}
    mt = re.fullmatch(r"phi(\d+)", name)
    if mt:
        return {int(mt.group(1)): 1.0}
    mt = re.fullmatch(r"smooth(\d+(?:\.\d+)?)", name)
    if mt:
        n = float(mt.group(1))
        return {l: (1.0 + l) ** (-n) for l in range(max_degree + 1)}
    raise InputError(f"unknown trace preset {name!r}")


def parse_radii(spec):
    if spec is None:
        return list(DEFAULT_RADII)
    if isinstance(spec, list):
        return [float(r) for r in spec]
    if isinstance(spec, dict):
        start, stop = float(spec["start"]), float(spec["stop"])
        if "num" in spec:
            return [float(r) for r in np.linspace(start, stop, int(spec["num"]))]
        step = float(spec["step"])
        n = int(round((stop - start) / step))
        return [start + k * step for k in range(n + 1)]
    raise InputError("radii must be a list or a {start, stop, step|num} range")


def load_run_config(path):
    """Parse a construct config into (params, trace coefficients, radii, max_degree, outputs)."""
    try:
        cfg = json.loads(Path(path).read_text())
        m = int(cfg["m"])
        lam = parse_lambda(cfg.get("lambda", {"num": 0, "den": 1}))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad config: {exc}") from exc
    max_degree = int(cfg.get("max_degree", 12))
    if not 0 <= max_degree <= MAX_DEGREE_CAP:
        raise InputError(f"max_degree must be in [0, {MAX_DEGREE_CAP}]")
    params = radial.EigenParams(m, lam)
    trace = cfg.get("trace", {})
    if isinstance(trace, str):
        coeffs = preset_trace(trace, m, max_degree)
    else:
        coeffs = {int(k): float(v) for k, v in trace.items()}
    if any(k > MAX_DEGREE_CAP for k in coeffs):
        raise InputError(f"trace degrees must be <= {MAX_DEGREE_CAP}")
    return params, coeffs, parse_radii(cfg.get("radii")), max_degree, cfg.get("output", {})


def cmd_construct(args):
    params, coeffs, radii, _, outputs = load_run_config(args.config)
    field_path = args.field_out or outputs.get("field") or "field.json"
    report_path = args.report_out or outputs.get("report") or "trace_report.csv"
    f = fld.construct_from_trace(coeffs, params)
    report = fld.trace_convergence(f, coeffs, radii)
    Path(field_path).write_text(fld.dumps_field(f))
    Path(report_path).write_text(report.to_csv())
    print(f"field: {len(f.modes)} mode(s) -> {field_path}")
    print(f"trace report -> {report_path}")
    for r, e in zip(report.radii, report.sup_errors):
        print(f"  r = {r:g}  sup_error = {e:.6e}")
    if math.isfinite(report.fitted_slope):
        print(f"fitted log-log slope: {report.fitted_slope:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------- evaluate / frequency

def cmd_evaluate(args):
    f = fld.loads_field(Path(args.field).read_text())
    radii = [float(r) for r in args.radii]
    th = np.linspace(0.0, math.pi, args.ntheta)
    rows = []
    for r in radii:
        u = np.atleast_1d(fld.evaluate(f, r, th))
        q = np.atleast_1d(fld.evaluate_ratio(f, r, th))
        rows += [(r, float(t), float(a), float(b)) for t, a, b in zip(th, u, q)]
    _emit(oracle.write_csv(["radius", "theta", "value", "ratio"], rows), args.out)
    return EXIT_OK


def cmd_frequency(args):
    f = fld.loads_field(Path(args.field).read_text())
    rep = oracle.frequency(f, [float(r) for r in args.radii])
    _emit(rep.to_csv(), args.out)
    return EXIT_OK


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- liouville

def synthetic_samples(kind, params, radii, degree=3, amplitude=1e-6):
    """Coefficient samples of a constant, polynomial or planted growing-mode field."""
    if kind == "constant":
        if params.lam != 0:
            raise InputError("constant samples need lambda = 0")
        f = fld.Field(params, constant_offset=5.0)
    elif kind == "polynomial":
        degs = params.resonant_degrees()
        if not degs or params.lam == 0:
            raise InputError(f"no polynomial eigenmode for lambda = {params.lam}")
        f = fld.resonant_field(params, degs[0])
    elif kind == "growing":
        f = fld.single_mode(params, degree, amplitude)
    else:
        raise InputError(f"unknown synthetic kind {kind!r}")
    return fld.sample_field(f, radii)


def load_samples(path):
    doc = json.loads(Path(path).read_text())
    try:
        return [float(r) for r in doc["radii"]], dict(doc["coefficients"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed samples file: {exc}") from exc


def cmd_liouville(args):
    params = radial.EigenParams(args.m, parse_lambda(args.lam))
    if args.samples:
        radii, coeffs = load_samples(args.samples)
    else:
        radii = [float(r) for r in args.radii]
        coeffs = synthetic_samples(args.synthetic, params, radii, args.degree, args.amplitude)
    rep = fld.liouville_classify(radii, coeffs, params, args.epsilon)
    print(rep.verdict)
    for deg in sorted(rep.slopes):
        env = ", ".join(f"{e:.3e}" for e in rep.envelopes[deg])
        print(f"  degree {deg}: envelope slope {rep.slopes[deg]:.3f}  envelopes [{env}]")
    if args.json_out:
        Path(args.json_out).write_text(rep.to_json() + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- verify

def _test_matrix(max_degree=8):
    cells = []
    for m in TEST_DIMS:
        for lam in TEST_LAMBDAS:
            p = radial.EigenParams(m, lam)
            cells += [(l, p) for l in range(max_degree + 1) if not p.is_resonant(l)]
    return cells


def _cell(l, p):
    return f"l={l} m={p.m} lambda={p.lam}"


def check_identities():
    out = []
    xs = np.concatenate([np.linspace(-20.3, 30.7, 97), [0.5, 1.5, 7.25, 100.5, 150.5]])
    worst = max(abs(sf.gamma(x + 1) / (x * sf.gamma(x)) - 1.0) for x in xs if abs(x - round(x)) > 1e-9)
    out.append(("gamma recurrence", worst <= 1e-13, f"max rel dev {worst:.2e}"))
    worst = max(
        abs(sf.gamma(x) * sf.gamma(1 - x) * math.sin(math.pi * x) / math.pi - 1.0)
        for x in np.linspace(0.03, 0.97, 41)
    )
    out.append(("gamma reflection", worst <= 1e-13, f"max rel dev {worst:.2e}"))
    worst = 0.0
    for a, b in ((0.5, 1.5), (2.5, 4.0), (-1.25, 3.0), (4.0, 6.5)):
        for x in (0.5, 3.0, 12.0, 35.0):
            lhs = sf.kummer_series(sf.KummerParams(a, b), x)
            rhs = math.exp(x) * sf.kummer_series(sf.KummerParams(b - a, b), -x)
            worst = max(worst, abs(lhs - rhs) / abs(lhs))
    out.append(("Kummer transformation", worst <= 1e-12, f"max rel dev {worst:.2e}"))
    return out + check_wronskian()


def check_resonant():
    out = []
    rng = np.random.default_rng(20240601)
    pts = [(rng.uniform(0.5, 10.0), rng.uniform(0.0, math.pi)) for _ in range(200)]
    p = radial.EigenParams(4, 1)
    q = radial.resonant_polynomial_for(0, p)
    ok_val = abs(q(2.0) - 0.5) <= 1e-15
    res = oracle.pde_residual(fld.resonant_field(p, 0), pts)
    out.append(("m=4 lambda=1 u=1-r^2/8", ok_val and res <= 1e-8, f"q(2)={q(2.0)!r} residual {res:.2e}"))
    for m in TEST_DIMS:
        for lam in TEST_LAMBDAS[1:]:
            p = radial.EigenParams(m, lam)
            for l in p.resonant_degrees():
                res = oracle.pde_residual(fld.resonant_field(p, l), pts[:40])
                out.append((f"resonant {_cell(l, p)}", res <= 1e-8, f"residual {res:.2e}"))
    return out


def check_frequency():
    out = []
    p = radial.EigenParams(3, Fraction(1, 2))
    u = oracle.frequency(fld.resonant_field(p, 1), [1.0, 4.0, 8.0, 12.0]).U_values
    dev = max(abs(v - 1.0) for v in u)
    out.append(("coordinate eigenmode U = 1", dev <= 1e-3, f"max |U - 1| {dev:.2e}"))

    def one(cell):
        l, p = cell
        val = oracle.frequency(fld.single_mode(p, l), [12.0]).U_values[0]
        bound = 72.0 - p.m - 2.0 * float(p.lam) - 1.0
        return (f"U(12) growing {_cell(l, p)}", val >= bound, f"U={val:.4f} bound {bound:.4f}")

    cells = _test_matrix() + [(0, radial.EigenParams(m, 0)) for m in TEST_DIMS]
    return out + ordered_map(one, cells)


REMAINDER_PAIRS = ((2.5, 4.0), (5.5, 9.0), (2.0, 2.5))


def check_remainder():
    out = []
    xs = np.geomspace(50.0, 400.0, 12)
    for a, b in REMAINDER_PAIRS:
        for n in range(4):
            rep = oracle.remainder_probe(sf.KummerParams(a, b), n, xs)
            target = -(n + 1)
            ok = abs(rep.slope - target) <= 0.1 * abs(target)
            out.append((f"remainder a={a:g} b={b:g} N={n}", ok, f"slope {rep.slope:.4f}"))
    return out


def check_oracle():
    def one(cell):
        l, p = cell
        err = oracle.closed_form_agreement(l, p)
        return (f"ODE oracle {_cell(l, p)}", err <= 1e-7, f"max rel dev {err:.2e}")

    return ordered_map(one, _test_matrix())


def check_wronskian():
    out = []
    p = radial.EigenParams(4, 1)
    q = radial.resonant_polynomial_for(0, p)
    w = oracle.wronskian_constants(q, lambda s: radial.second_solution(p, s), 4, np.linspace(0.5, 6.0, 23))
    out.append(("Wronskian lambda=1 m=4 (q, l)", oracle.relative_spread(w) <= 1e-8,
                f"spread {oracle.relative_spread(w):.2e}"))
    p = radial.EigenParams(3, Fraction(1, 4))
    w = oracle.wronskian_constants(
        lambda s: radial.mode_solution(0, p, 1.0, s),
        lambda s: radial.second_solution(p, s),
        3,
        np.linspace(0.5, 8.0, 16),
    )
    out.append(("Wronskian lambda=1/4 m=3 (f, p)", oracle.relative_spread(w) <= 1e-8,
                f"spread {oracle.relative_spread(w):.2e}"))
    w = oracle.wronskian_constants(lambda s: 1.0, lambda s: radial.u0_harmonic(3, s), 3, np.linspace(0.5, 8.0, 16))
    out.append(("Wronskian lambda=0 m=3 (1, u0)", oracle.relative_spread(w) <= 1e-8,
                f"spread {oracle.relative_spread(w):.2e}"))
    return out


def check_residual():
    radii = np.geomspace(0.2, 12.0, 50)

    def one(cell):
        l, p = cell
        worst = max(
            radial.radial_operator_residual(lambda s: radial.mode_solution(l, p, 1.0, s), r, l, p)
            for r in radii
        )
        return (f"ODE residual {_cell(l, p)}", worst <= 1e-6, f"max rel residual {worst:.2e}")

    return ordered_map(one, _test_matrix(10))


SCOPES = {
    "identities": check_identities,
    "resonant": check_resonant,
    "frequency": check_frequency,
    "remainder": check_remainder,
    "oracle": check_oracle,
    "wronskian": check_wronskian,
    "residual": check_residual,
}


def cmd_verify(args):
    scopes = list(SCOPES) if args.scope == "all" else [args.scope]
    failed = 0
    for scope in scopes:
        for name, ok, detail in SCOPES[scope]():
            if not ok:
                failed += 1
            print(f"{'PASS' if ok else 'FAIL'} [{scope}] {name}: {detail}")
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}")
    return EXIT_OK if not failed else EXIT_FAIL


# ---------------------------------------------------------------- main

def build_parser():
    ap = argparse.ArgumentParser(
        prog="drift-spectral",
        description="Quasi-harmonic functions and drift-Laplacian eigenfunctions from mode expansions.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kummer", help="evaluate Kummer's function M(a, b; x)")
    k.add_argument("--a", type=float, required=True)
    k.add_argument("--b", type=float, required=True)
    k.add_argument("--x", type=float, required=True)
    k.add_argument("--regime", choices=("auto", "series", "asymptotic"), default="auto")
    k.add_argument("--compare", action="store_true", help="print both regimes and their delta")
    k.set_defaults(func=cmd_kummer)

    c = sub.add_parser("construct", help="build a field from a trace config")
    c.add_argument("config")
    c.add_argument("--field-out")
    c.add_argument("--report-out")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--scope", choices=tuple(SCOPES) + ("all",), default="all")
    v.set_defaults(func=cmd_verify)

    lv = sub.add_parser("liouville", help="classify sampled coefficients under a growth bound")
    src = lv.add_mutually_exclusive_group(required=True)
    src.add_argument("--samples", help='JSON {"radii": [...], "coefficients": {"l": [...]}}')
    src.add_argument("--synthetic", choices=("constant", "polynomial", "growing"))
    lv.add_argument("--m", type=int, default=3)
    lv.add_argument("--lambda", dest="lam", default="0")
    lv.add_argument("--epsilon", type=float, default=1.0)
    lv.add_argument("--radii", nargs="+", type=float, default=[8.0, 12.0, 16.0, 20.0])
    lv.add_argument("--degree", type=int, default=3, help="degree of the planted growing mode")
    lv.add_argument("--amplitude", type=float, default=1e-6)
    lv.add_argument("--json-out")
    lv.set_defaults(func=cmd_liouville)

    e = sub.add_parser("evaluate", help="tabulate u and u/u0 of a field file on a grid")
    e.add_argument("field")
    e.add_argument("--radii", nargs="+", type=float, required=True)
    e.add_argument("--ntheta", type=int, default=33)
    e.add_argument("--out")
    e.set_defaults(func=cmd_evaluate)

    fq = sub.add_parser("frequency", help="frequency function of a field file")
    fq.add_argument("field")
    fq.add_argument("--radii", nargs="+", type=float, required=True)
    fq.add_argument("--out")
    fq.set_defaults(func=cmd_frequency)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdmissibilityError as exc:
        degs = ", ".join(str(d) for d in exc.degrees)
        print(f"error: {exc} (rejected degrees: {degs})", file=sys.stderr)
        return EXIT_REJECT
    except (InputError, *_INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECT


if __name__ == "__main__":
    sys.exit(main())
