"""Command-line front end: ``fcb compute | verify | sweep``.

Exit codes: 0 success, 1 a verification check failed, 2 bad input or empty
range, 3 a tolerance could not be certified.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .bounds import (CSV_HEADER, cos_norm, eps_exact, eps_l2_closed_form,
                     eps_l2_integral_form, fmt)
from .errors import DomainError, ToleranceError
from .kernels import ClassSpec, PowerLaw, Stationary, TailKernel
from .quadrature import QuadratureConfig, integrate
from .special_fn import elliptic_k, hurwitz_zeta, hurwitz_zeta_integral, riemann_zeta

EXIT_OK, EXIT_CHECK, EXIT_DOMAIN, EXIT_TOL = 0, 1, 2, 3
SUITES = ("special", "kernel", "l2", "tail", "regime", "bracket")


# ------------------------------------------------------------------ parsing

def parse_n(text: str) -> list[int]:
    """'4', '1..6' (inclusive) or '1,2,5'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", part)
        if m:
            out.extend(range(int(m.group(1)), int(m.group(2)) + 1))
        elif re.fullmatch(r"-?\d+", part):
            out.append(int(part))
        else:
            raise DomainError(f"cannot parse n from {part!r}")
    if not out:
        raise DomainError("empty n range")
    if min(out) < 1:
        raise DomainError("n must be >= 1")
    return sorted(set(out))


_RULE = re.compile(r"(\d+(?:\.\d*)?)?\s*\*?\s*\(\s*n\s*\+\s*1\s*\)")


def parse_r(text: str):
    """Return a function n -> list of r.

    Accepts numbers ('4', '2,8'), inclusive ranges 'a..b:k' with k log-spaced
    points, and rules 'c(n+1)' with c >= 1 (several may be comma separated).
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise DomainError("empty r specification")
    fixed, rules = [], []
    for part in parts:
        m = _RULE.fullmatch(part)
        if m:
            c = float(m.group(1)) if m.group(1) else 1.0
            if c < 1:
                raise DomainError(f"r-rule multiplier must be >= 1, got {c}")
            rules.append(c)
            continue
        m = re.fullmatch(r"([\d.eE+-]+)\.\.([\d.eE+-]+)(?::(\d+))?", part)
        if m:
            a, b = float(m.group(1)), float(m.group(2))
            k = int(m.group(3) or 8)
            if not (0 < a <= b) or k < 1:
                raise DomainError(f"bad r range {part!r}")
            fixed.extend(np.geomspace(a, b, k).tolist() if k > 1 else [a])
            continue
        try:
            fixed.append(float(part))
        except ValueError:
            raise DomainError(f"cannot parse r from {part!r}") from None

    def rule(n):
        return sorted(set(fixed + [c * (n + 1) for c in rules]))
    return rule


def parse_exponent(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        v = float(text)
    except ValueError:
        raise DomainError(f"cannot parse exponent {text!r}") from None
    if not v >= 1:
        raise DomainError(f"exponent must lie in [1, inf], got {v}")
    return v


def parse_metric(text: str):
    if text == "uniform":
        return "uniform"
    m = re.fullmatch(r"lp:(.+)", text)
    if not m:
        raise DomainError(f"metric must be 'uniform' or 'lp:<q>', got {text!r}")
    return parse_exponent(m.group(1))


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read {path}: {exc}") from None


def build_spec(args, r: float | None) -> ClassSpec:
    if args.psi and args.psi.startswith("file:"):
        psi = _load_json(args.psi[5:])
    elif args.psi and args.psi.startswith("power:"):
        psi = {"power": float(args.psi[6:])}
    elif args.psi:
        raise DomainError(f"--psi must be power:<r> or file:<path>, got {args.psi!r}")
    elif r is not None:
        psi = {"power": r}
    else:
        raise DomainError("give --r or --psi")
    beta = _load_json(args.beta_seq) if args.beta_seq else {"stationary": args.beta}
    metric = parse_metric(args.metric)
    metric = metric if metric == "uniform" else {"Lp": metric}
    return ClassSpec.from_dict({"psi": psi, "beta": beta, "p": parse_exponent(args.p),
                                "metric": metric})


def make_config(tol: float) -> QuadratureConfig:
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    if tol < 1e-15:
        raise ToleranceError(f"tolerance {tol:g} is below what double precision can certify")
    return QuadratureConfig(rel_tol=min(tol, 1e-11), abs_tol=tol)


# ------------------------------------------------------------------ output

def _emit_table(rows, header, out, stream):
    if out == "json":
        json.dump([dict(zip(header, row)) for row in rows], stream, indent=2)
        stream.write("\n")
    elif out == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    else:
        widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
        stream.write("  ".join(str(h).ljust(wd) for h, wd in zip(header, widths)) + "\n")
        for row in rows:
            stream.write("  ".join(str(c).ljust(wd) for c, wd in zip(row, widths)) + "\n")


# ----------------------------------------------------------------- commands

def cmd_compute(args, stream) -> int:
    ns = parse_n(args.n)
    if len(ns) != 1:
        raise DomainError("compute takes a single n")
    n = ns[0]
    r_values = parse_r(args.r)(n) if args.r else [None]
    if len(r_values) != 1:
        raise DomainError("compute takes a single r")
    spec = build_spec(args, r_values[0])
    rep = eps_exact(spec, n, make_config(args.tol))
    leading = rep.lead_coefficient * cos_norm(rep.q) / math.pi
    implied = None
    if isinstance(spec.psi, PowerLaw):
        implied = rep.scaled_excess / (1.0 + 1.0 / n) ** -spec.psi.r
    header = list(CSV_HEADER) + ["leading", "implied_O1"]
    row = rep.csv_row() + [fmt(leading), fmt(implied)]
    if args.out == "json":
        json.dump({**rep.to_dict(), "leading": leading, "implied_O1": implied}, stream,
                  indent=2, default=str)
        stream.write("\n")
    elif args.out == "csv":
        _emit_table([row], header, "csv", stream)
    else:
        nr = rep.scaled_value if isinstance(spec.psi, PowerLaw) else None
        stream.write(f"eps_n        {rep.value:.17g}\n")
        stream.write(f"n^r * eps_n  {fmt(nr)}\n")
        stream.write(f"leading      {leading:.17g}\n")
        stream.write(f"implied O(1) {fmt(implied)}\n")
        stream.write(f"q = {fmt(rep.q)}, quadrature error {rep.quadrature_error:.3g}\n")
    return EXIT_OK


def cmd_sweep(args, stream) -> int:
    ns = parse_n(args.n)
    if not args.r:
        raise DomainError("sweep needs --r")
    rule = parse_r(args.r)
    metric = parse_metric(args.metric)
    if args.formula == "elliptic":
        setting, p = "stechkin", math.inf
    elif metric == "uniform":
        setting, p = "uniform", parse_exponent(args.p)
    else:
        setting, p = "lp", metric
    res = asy.remainder_sweep(setting, ns, rule, p, args.beta, make_config(args.tol),
                              strict=not args.allow_low_r)
    rows = [d.csv_row() for d in res.diagnostics]
    if args.out == "json":
        json.dump({"rows": [dict(zip(asy.SWEEP_HEADER, r)) for r in rows],
                   "max_abs_implied_O1": res.max_abs_O1,
                   "max_abs_telyakovskii_O1": res.max_abs_telyakovskii}, stream, indent=2)
        stream.write("\n")
    else:
        _emit_table(rows, asy.SWEEP_HEADER, args.out, stream)
        stream.write(f"# max |implied_O1| = {fmt(res.max_abs_O1)}\n")
    return EXIT_OK


# ------------------------------------------------------------------ verify

def _check(rows, suite, name, ok, detail):
    rows.append((suite, name, "pass" if ok else "FAIL", detail))


def _suite_special(rows, tol, cfg):
    kcfg = QuadratureConfig(rel_tol=1e-14, abs_tol=1e-15)
    worst = 0.0
    for q in [i / 10 for i in range(10)] + [0.95, 0.99]:
        direct = integrate(lambda th: 1.0 / np.sqrt(1.0 - (q * np.sin(th)) ** 2), kcfg,
                           0.0, 0.5 * math.pi).value
        worst = max(worst, abs(elliptic_k(q, tol) - direct))
    _check(rows, "special", "elliptic_k AGM vs integral", worst <= 1e-10, f"{worst:.2e}")
    worst = 0.0
    for s in np.linspace(1.5, 40.0, 12):
        for ell in range(1, 17):
            worst = max(worst, abs(hurwitz_zeta(s, ell, tol) - hurwitz_zeta_integral(s, ell, tol)))
    _check(rows, "special", "hurwitz_zeta series vs integral", worst <= 1e-10, f"{worst:.2e}")
    e2 = abs(riemann_zeta(2.0) - math.pi ** 2 / 6)
    e4 = abs(riemann_zeta(4.0) - math.pi ** 4 / 90)
    _check(rows, "special", "zeta(2), zeta(4)", max(e2, e4) <= 1e-12, f"{max(e2, e4):.2e}")


def _suite_kernel(rows, tol, cfg):
    for r, beta, n in [(2.0, 0.0, 1), (3.5, 1.0, 2), (6.0, 0.3, 3)]:
        k = TailKernel(PowerLaw(r), Stationary(beta), n)
        mean = integrate(k.scaled, cfg, breakpoints=[0.0]).value
        _check(rows, "kernel", f"zero mean r={r:g} beta={beta:g} n={n}", abs(mean) <= 1e-10,
               f"{mean:.2e}")
    t = np.linspace(0.1, 3.0, 50)
    even = TailKernel(PowerLaw(3.0), Stationary(0.0), 2)
    odd = TailKernel(PowerLaw(3.0), Stationary(1.0), 2)
    e = float(np.max(np.abs(even(t) - even(-t))))
    o = float(np.max(np.abs(odd(t) + odd(-t))))
    _check(rows, "kernel", "parity beta=0 even, beta=1 odd", max(e, o) <= 1e-13,
           f"{max(e, o):.2e}")


def _suite_l2(rows, tol, cfg):
    worst = 0.0
    for r in (1.5, 2.0, 8.0):
        for n in (1, 3, 8):
            a = eps_exact(ClassSpec(PowerLaw(r), Stationary(0.0), 2), n, cfg).value
            b = eps_exact(ClassSpec(PowerLaw(r), Stationary(0.0), 1, 2.0), n, cfg).value
            c = eps_l2_closed_form(r, n)
            d = eps_l2_integral_form(r, n, tol)
            worst = max(worst, max(a, b, c, d) - min(a, b, c, d))
    _check(rows, "l2", "four L2 routes agree", worst <= 1e-9, f"{worst:.2e}")


def _suite_tail(rows, tol, cfg):
    bad = []
    for n in range(1, 11):
        for r in (n + 1, n + 2, 2 * n + 2, 5 * n):
            if r < n + 1 or r <= 1:
                continue
            tc = asy.tail_bound_check(n, float(r))
            if not (all(tc.links) and tc.lhs < tc.rhs):
                bad.append((n, r))
    _check(rows, "tail", "tail-sum bound chain", not bad, f"failing {bad}" if bad else "all links")


def _suite_regime(rows, tol, cfg):
    bad = [(n, r) for n in range(1, 51) for r in (1, 2, 5, 10, 100)
           if not asy.convergence_regime_check(n, float(r)).holds]
    _check(rows, "regime", "(1+1/n)^-r <= exp(-r/(n+1))", not bad,
           f"failing {bad}" if bad else "50x5 points")


def _suite_bracket(rows, tol, cfg):
    p2 = asy.remainder_sweep("uniform", range(1, 7), lambda n: [n + 1, 2 * (n + 1), 5 * (n + 1)],
                             2.0, cfg=cfg)
    _check(rows, "bracket", "p=2 remainder constant <= 3", p2.max_abs_O1 <= 3,
           f"max {p2.max_abs_O1:.4g}")
    pinf = asy.remainder_sweep("uniform", range(1, 7), lambda n: [10 * (n + 1)], math.inf, cfg=cfg)
    _check(rows, "bracket", "p=inf, r=10(n+1): constant <= 3", pinf.max_abs_O1 <= 3,
           f"max {pinf.max_abs_O1:.4g}")


_SUITE_FN = {"special": _suite_special, "kernel": _suite_kernel, "l2": _suite_l2,
             "tail": _suite_tail, "regime": _suite_regime, "bracket": _suite_bracket}


def cmd_verify(args, stream) -> int:
    suites = SUITES if args.suite is None else tuple(s.strip() for s in args.suite.split(","))
    unknown = [s for s in suites if s not in _SUITE_FN]
    if unknown:
        raise DomainError(f"unknown suite(s) {unknown}; choose from {', '.join(SUITES)}")
    cfg = make_config(args.tol)
    rows = []
    for s in suites:
        _SUITE_FN[s](rows, args.tol, cfg)
    _emit_table(rows, ("suite", "check", "status", "detail"), args.out, stream)
    return EXIT_OK if all(r[2] == "pass" for r in rows) else EXIT_CHECK


# -------------------------------------------------------------------- main

def _common(parser, out_default):
    parser.add_argument("--tol", type=float, default=1e-12, help="absolute tolerance")
    parser.add_argument("--out", choices=("csv", "json", "pretty"), default=out_default)


def _class_args(parser):
    parser.add_argument("--n", default="1", help="n, 'a..b' or 'a,b,c'")
    parser.add_argument("--r", help="r value(s), 'a..b:k' or rule 'c(n+1)'")
    parser.add_argument("--p", default="inf", help="class exponent, number or 'inf'")
    parser.add_argument("--metric", default="uniform", help="'uniform' or 'lp:<q>'")
    parser.add_argument("--beta", type=float, default=0.0, help="stationary phase")
    parser.add_argument("--beta-seq", help="JSON file {'explicit': [...], 'default': b}")
    parser.add_argument("--psi", help="'power:<r>' or 'file:<path>' (JSON psi config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    cp = sub.add_parser("compute", help="one eps_n value")
    _common(cp, "pretty")
    _class_args(cp)
    sw = sub.add_parser("sweep", help="remainder constants over a grid")
    _common(sw, "csv")
    _class_args(sw)
    sw.add_argument("--formula", choices=("high-smoothness", "elliptic"),
                    default="high-smoothness")
    sw.add_argument("--allow-low-r", action="store_true",
                    help="permit points with r < n + 1")
    vf = sub.add_parser("verify", help="run the built-in check suites")
    _common(vf, "pretty")
    vf.add_argument("--suite", help=f"comma list from {', '.join(SUITES)}")
    return parser


def main(argv=None, stream=None) -> int:
    stream = stream if stream is not None else sys.stdout
    args = build_parser().parse_args(argv)
    handler = {"compute": cmd_compute, "sweep": cmd_sweep, "verify": cmd_verify}[args.command]
    try:
        return handler(args, stream)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ToleranceError as exc:
        print(f"tolerance not met: {exc}", file=sys.stderr)
        return EXIT_TOL


if __name__ == "__main__":
    sys.exit(main())
