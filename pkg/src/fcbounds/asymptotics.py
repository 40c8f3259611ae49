"""Leading terms of the classical asymptotic formulas and their remainders.

All estimates are in absolute units: ``leading`` approximates eps_n itself and
``remainder_scale`` is the size of the term multiplying the unknown O(1), so
``implied_O1 = (exact - leading) / remainder_scale``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .bounds import cos_norm, conjugate, eps_exact, fmt, tail_sum_power
from .errors import DomainError
from .kernels import ClassSpec, PowerLaw, Stationary
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .special_fn import elliptic_k

FORMULAS = ("kolmogorov", "stechkin_elliptic", "high_smoothness_uniform",
            "high_smoothness_lp")
SETTINGS = {"uniform": "high_smoothness_uniform", "lp": "high_smoothness_lp"}
SWEEP_HEADER = ["setting", "n", "r", "p", "q", "exact", "leading",
                "remainder_scale", "implied_O1"]


@dataclass(frozen=True)
class AsymptoticEstimate:
    formula_id: str
    leading: float
    remainder_scale: float
    n: int
    r: float
    in_hypothesis: bool = True

    def __post_init__(self):
        if self.formula_id not in FORMULAS:
            raise DomainError(f"unknown formula {self.formula_id!r}")
        if not (self.leading >= 0 and self.remainder_scale > 0):
            raise DomainError("need leading >= 0 and remainder_scale > 0")


@dataclass(frozen=True)
class RemainderDiagnostic:
    setting: str
    n: int
    r: float
    p: float
    q: float
    exact: float
    leading: float
    remainder_scale: float
    implied_O1: float
    in_hypothesis: bool = True
    extras: dict = field(default_factory=dict, compare=False)

    def csv_row(self) -> list[str]:
        return [self.setting, fmt(self.n), fmt(self.r), fmt(self.p), fmt(self.q),
                fmt(self.exact), fmt(self.leading), fmt(self.remainder_scale),
                fmt(self.implied_O1)]


def _check_nr(n, r):
    if not (isinstance(n, int) and n >= 1):
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")


def leading_kolmogorov(n: int, r: float) -> AsymptoticEstimate:
    """(4/pi^2) ln(n) / n^r with an O(n^-r) remainder; n >= 2."""
    _check_nr(n, r)
    if n < 2:
        raise DomainError("the logarithmic formula is vacuous for n = 1")
    scale = float(n) ** -r
    return AsymptoticEstimate("kolmogorov", 4.0 / math.pi ** 2 * math.log(n) * scale,
                              scale, n, r)


def leading_stechkin_elliptic(n: int, r: float, tol: float = 1e-12) -> AsymptoticEstimate:
    """n^-r (8/pi^2) K(exp(-r/n)) with an O(n^-r / r) remainder; r >= 1."""
    _check_nr(n, r)
    if r < 1:
        raise DomainError(f"the elliptic formula needs r >= 1, got {r}")
    scale = float(n) ** -r
    lead = scale * 8.0 / math.pi ** 2 * elliptic_k(math.exp(-r / n), tol)
    return AsymptoticEstimate("stechkin_elliptic", lead, scale / r, n, r)


def leading_high_smoothness(n: int, r: float, p: float,
                            setting: str = "uniform") -> AsymptoticEstimate:
    """n^-r ||cos||_q / pi with remainder n^-r (1 + 1/n)^-r.

    ``setting="uniform"`` is the class W_p in the uniform metric (q = p');
    ``setting="lp"`` is the class W_1 in the L_p metric (q = p).  r < n + 1 is
    allowed but marked ``in_hypothesis=False``.
    """
    _check_nr(n, r)
    if setting not in SETTINGS:
        raise DomainError(f"setting must be one of {sorted(SETTINGS)}, got {setting!r}")
    q = conjugate(p) if setting == "uniform" else p
    if not q >= 1:
        raise DomainError(f"exponent must lie in [1, inf], got {p}")
    scale = float(n) ** -r
    return AsymptoticEstimate(SETTINGS[setting], scale * cos_norm(q) / math.pi,
                              scale * (1.0 + 1.0 / n) ** -r, n, r,
                              in_hypothesis=r >= n + 1)


@dataclass(frozen=True)
class TailCheck:
    lhs: float
    rhs: float
    holds: bool
    chain: tuple  # (lhs, A, B, C, D)
    links: tuple  # truth of lhs < A, A <= B, B <= C, C <= D


def tail_bound_check(n: int, r: float) -> TailCheck:
    """Integral-test bound on sum_{k > n} k^-r, checked link by link.

    lhs < (n+1)^-r (r+n)/(r-1) <= (n+1)^-r (2r-1)/(r-1) <= (n+1)^-r (2+1/n)
    <= 3 (n+1)^-r.  The last three links are compared exactly in rationals;
    they hold for r >= n + 1.
    """
    _check_nr(n, r)
    if not r > 1:
        raise DomainError("the tail sum needs r > 1")
    lhs = tail_sum_power(r, n)
    base = float(n + 1) ** -r
    factors = [(r + n) / (r - 1), (2 * r - 1) / (r - 1), 2.0 + 1.0 / n, 3.0]
    chain = (lhs,) + tuple(base * f for f in factors)
    rr = Fraction(r)
    exact = [(rr + n) / (rr - 1), (2 * rr - 1) / (rr - 1), 2 + Fraction(1, n), Fraction(3)]
    links = (lhs < chain[1],) + tuple(a <= b for a, b in zip(exact, exact[1:]))
    return TailCheck(lhs, chain[-1], lhs <= chain[-1], chain, links)


@dataclass(frozen=True)
class RegimeCheck:
    lhs: float
    bound: float
    holds: bool


def convergence_regime_check(n: int, r: float) -> RegimeCheck:
    """(1 + 1/n)^-r <= exp(-r / (n + 1)); log1p keeps the comparison honest."""
    _check_nr(n, r)
    log_lhs = -r * math.log1p(1.0 / n)
    log_rhs = -r / (n + 1)
    return RegimeCheck(math.exp(log_lhs), math.exp(log_rhs), log_lhs <= log_rhs)


def _class_for(setting: str, r: float, p: float, beta: float) -> ClassSpec:
    if setting == "uniform":
        return ClassSpec(PowerLaw(r), Stationary(beta), p)
    if setting == "lp":
        return ClassSpec(PowerLaw(r), Stationary(beta), 1, p)
    if setting == "stechkin":
        return ClassSpec(PowerLaw(r), Stationary(beta), math.inf)
    raise DomainError(f"unknown setting {setting!r}")


def diagnose(setting: str, n: int, r: float, p: float = math.inf, beta: float = 0.0,
             cfg: QuadratureConfig = DEFAULT_CONFIG) -> RemainderDiagnostic:
    """Exact eps_n against one formula's leading term.

    Settings: "uniform" and "lp" use the high-smoothness formula, "stechkin"
    compares the p = inf class with the elliptic formula.  The subtraction
    uses the excess stored by ``eps_exact``, which keeps full relative
    precision when the remainder is far below the leading term.
    """
    spec = _class_for(setting, r, p, beta)
    rep = eps_exact(spec, n, cfg)
    if setting == "stechkin":
        est = leading_stechkin_elliptic(n, r)
        diff = rep.value - est.leading
    else:
        est = leading_high_smoothness(n, r, p, setting)
        diff = rep.lead_coefficient * rep.scaled_excess
    tely = diff / (float(n) ** -r * (1.0 + 2.0 / n) ** -r)
    return RemainderDiagnostic(setting, n, r, spec.p if setting != "lp" else p, rep.q,
                               rep.value, est.leading, est.remainder_scale,
                               diff / est.remainder_scale, est.in_hypothesis,
                               {"telyakovskii_O1": tely})


@dataclass
class SweepResult:
    diagnostics: list
    max_abs_O1: float
    max_abs_telyakovskii: float


def _workers(requested: Optional[int]) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("FCB_THREADS")
    return max(1, int(env)) if env else 1


def remainder_sweep(setting: str, n_range: Iterable[int],
                    r_rule: Callable[[int], Iterable[float]], p: float = math.inf,
                    beta: float = 0.0, cfg: QuadratureConfig = DEFAULT_CONFIG,
                    workers: Optional[int] = None, strict: bool = True) -> SweepResult:
    """Diagnostics over n in ``n_range`` and r in ``r_rule(n)``, sorted by (n, r).

    With ``strict`` (the default) a point with r < n + 1 in a high-smoothness
    setting is a DomainError.
    """
    points = sorted({(int(n), float(r)) for n in n_range for r in r_rule(int(n))})
    if not points:
        raise DomainError("empty sweep")
    if strict and setting in SETTINGS:
        bad = [(n, r) for n, r in points if r < n + 1]
        if bad:
            raise DomainError(f"r >= n + 1 violated at {bad[:3]}")

    def one(pt):
        return diagnose(setting, pt[0], pt[1], p, beta, cfg)

    nw = _workers(workers)
    if nw == 1:
        diags = [one(pt) for pt in points]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            diags = list(pool.map(one, points))
    return SweepResult(diags, max(abs(d.implied_O1) for d in diags),
                       max(abs(d.extras["telyakovskii_O1"]) for d in diags))


def kolmogorov_table(ns: Iterable[int] = (2, 4, 8, 16, 32, 64),
                     rs: Iterable[float] = (1.25, 2.0), beta: float = 0.0,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> list[dict]:
    """Logarithmic leading term against exact p = inf values; diagnostic only."""
    rows = []
    for r in rs:
        for n in ns:
            est = leading_kolmogorov(n, r)
            exact = eps_exact(ClassSpec(PowerLaw(r), Stationary(beta), math.inf), n, cfg).value
            rows.append({"n": n, "r": r, "exact": exact, "leading": est.leading,
                         "implied_O1": (exact - est.leading) / est.remainder_scale})
    return rows
