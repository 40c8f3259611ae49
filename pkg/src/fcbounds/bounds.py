"""Worst-case Fourier errors eps_n over convolution classes.

The duality route evaluates

    eps_n = (1/pi) * || Psi_{beta,n} ||_q,

q = p' for the uniform metric on C^psi_{beta,p} and q = p_target for the L_p
metric on C^psi_{beta,1}.  The kernel is handled in units of psi(n): it is
written as cos(n t - shift) + h(t), and the excess ||cos + h||_q - ||cos||_q
is integrated directly, so that n^r eps_n - ||cos||_q / pi stays accurate
even when it is far below double-precision resolution of n^r eps_n itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache, partial
from typing import Optional

import numpy as np

from scipy.optimize import brentq

from .errors import DomainError, ToleranceError
from .kernels import ClassSpec, PowerLaw, TailKernel, convolve_with_phi
from .quadrature import (DEFAULT_CONFIG, NormResult, QuadratureConfig,
                         _periodic_max, integrate, lq_norm, sign_changes)
from .special_fn import gamma_fn, hurwitz_zeta, hurwitz_zeta_integral

CSV_HEADER = ("n", "r_or_psi_id", "beta_id", "p", "metric", "q", "value",
              "nr_value", "method", "quad_error")


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def conjugate(p: float) -> float:
    """1/p + 1/p' = 1 with 1' = inf and inf' = 1."""
    if not p >= 1:
        raise DomainError(f"exponent must lie in [1, inf], got {p}")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def cos_norm_power(q: float) -> float:
    """int_{-pi}^{pi} |cos t|^q dt."""
    return 2.0 * math.sqrt(math.pi) * gamma_fn(0.5 * (q + 1.0)) / gamma_fn(0.5 * q + 1.0)


def cos_norm(q: float) -> float:
    """||cos t||_q over one period: 4 for q = 1, sqrt(pi) for q = 2, 1 for q = inf."""
    if math.isinf(q):
        return 1.0
    if q == 1:
        return 4.0
    if q == 2:
        return math.sqrt(math.pi)
    return cos_norm_power(q) ** (1.0 / q)


def dual_exponent(spec: ClassSpec) -> float:
    if spec.uniform:
        return conjugate(spec.p)
    if spec.p != 1:
        raise DomainError("the L_p metric is only in scope for classes with p = 1")
    return spec.metric


@dataclass
class ErrorReport:
    value: float
    method: str
    quadrature_error: float
    n: int
    class_spec: ClassSpec
    q: float
    lead_coefficient: float
    scaled_excess: Optional[float] = None
    gap: Optional[float] = None
    extras: dict = field(default_factory=dict)

    @property
    def scaled_value(self) -> float:
        """value / psi(n); equals n^r * value for a power law."""
        return self.value / self.lead_coefficient

    def csv_row(self) -> list[str]:
        spec = self.class_spec
        r_id = fmt(spec.psi.r) if isinstance(spec.psi, PowerLaw) else spec.psi.ident
        nr = self.scaled_value if isinstance(spec.psi, PowerLaw) else None
        metric = "uniform" if spec.uniform else f"lp:{fmt(spec.metric)}"
        return [fmt(self.n), r_id, spec.phases.ident, fmt(spec.p), metric, fmt(self.q),
                fmt(self.value), fmt(nr), self.method, fmt(self.quadrature_error)]

    def to_dict(self) -> dict:
        return {"n": self.n, "class_spec": self.class_spec.to_dict(),
                "q": fmt(self.q), "value": self.value, "scaled_value": self.scaled_value,
                "scaled_excess": self.scaled_excess, "method": self.method,
                "quadrature_error": self.quadrature_error, "gap": self.gap,
                **self.extras}


def _check_scope(spec: ClassSpec, q: float):
    psi = spec.psi
    if not psi.summable and q != 2:
        raise DomainError("coefficients are not summable: only q = 2 is in scope")


def _kernel_cfg(kernel: TailKernel, cfg: QuadratureConfig) -> QuadratureConfig:
    # relative accuracy is what matters; the excess can be ~1e-20 in psi(n) units
    depth = cfg.max_depth if kernel.psi.summable else max(cfg.max_depth, 64)
    return QuadratureConfig(rel_tol=cfg.rel_tol, abs_tol=1e-300, max_depth=depth,
                            base_panels=cfg.base_panels, max_evals=cfg.max_evals)


def _breakpoints(kernel: TailKernel, g, frequency: int, level: float = 0.0):
    bp = [0.0]
    bp.extend(kernel.lead_zeros().tolist())
    pts = max(1024, 8 * frequency)
    if level == 0.0:
        bp.extend(sign_changes(g, points=pts))
    else:
        bp.extend(sign_changes(lambda t: g(t) - level, points=pts))
    return sorted(bp)


def _roots(g, level: float, frequency: int):
    return sign_changes(lambda t: g(t) - level, points=max(1024, 8 * frequency))


def _sign_balance(g, level: float, frequency: int) -> float:
    """int sgn(g - level) dt over one period, from the crossings of g = level."""
    edges = [-math.pi] + _roots(g, level, frequency) + [math.pi]
    edges = np.asarray(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    signs = np.sign(g(mids) - level)
    return float(np.sum(signs * np.diff(edges)))


def best_level(kernel: TailKernel, q: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """The constant c minimising ||Psi_n / psi(n) - c||_q (finite q).

    Zero for q = 2 (the kernel has zero mean).  Otherwise the root of the
    first-order condition int |g - c|^(q-1) sgn(g - c) = 0.
    """
    if q == 2:
        return 0.0
    g = partial(kernel.scaled, tol=1e-12)
    freq = kernel.frequency()
    samples = g(np.linspace(-math.pi, math.pi, 8192, endpoint=False))
    lo, hi = float(samples.min()), float(samples.max())
    if q == 1:
        moment = lambda c: _sign_balance(g, c, freq)  # noqa: E731
    else:
        # the norm is stationary in c, so a level good to ~1e-9 costs ~1e-18
        kcfg = replace(_kernel_cfg(kernel, cfg), rel_tol=max(cfg.rel_tol, 1e-9))
        zeros = _breakpoints(kernel, g, freq)

        def density(c):
            def f(t):
                y = g(t) - c
                return np.sign(y) * np.abs(y) ** (q - 1.0)
            return f

        @lru_cache(maxsize=None)
        def moment(c):
            bp = sorted(zeros + _roots(g, c, freq))
            return integrate(density(c), kcfg, breakpoints=bp).value

    # the same condition on the samples gives a start good to a few digits
    if q == 1:
        c0 = float(np.median(samples))
    else:
        c0 = brentq(lambda c: float(np.sum(np.sign(samples - c) * np.abs(samples - c) ** (q - 1.0))),
                    lo, hi, xtol=1e-15)
    m0 = moment(c0)
    if m0 == 0.0:
        return c0
    # moment is decreasing in c; walk away from c0 until the sign flips
    step = 1e-6 * (hi - lo)
    a = c0
    while True:
        b = a + math.copysign(step, m0)
        mb = moment(b)
        if mb == 0.0:
            return b
        if (mb > 0) != (m0 > 0):
            break
        a, step = b, step * 16
        if step > 2 * (hi - lo) + 2:
            raise ToleranceError("no sign change of the first-order condition")
    lo_c, hi_c = sorted((a, b))
    return brentq(moment, lo_c, hi_c, xtol=1e-12 * (hi - lo) + 1e-300, rtol=1e-12)


def harmonic_excess(kernel: TailKernel, q: float, cfg: QuadratureConfig = DEFAULT_CONFIG,
                    level: float = 0.0, quotient: bool = False) -> NormResult:
    """||cos(n t - shift) + h - level||_q - ||cos||_q, h the scaled kernel remainder.

    With ``quotient`` and q = inf the distance to the constants is returned
    instead: (max g - min g) / 2 - 1.
    """
    n = kernel.n
    shift = kernel.lead_shift
    freq = kernel.frequency()

    def parts(t):
        return kernel.lead(t), kernel.rest(t) - level

    if math.isinf(q):
        def theta(t):
            return n * np.asarray(t, dtype=float) - shift

        def over_top(t):  # g - 1, with 1 - cos written as 2 sin^2
            return kernel.rest(t) - 2.0 * np.sin(0.5 * theta(t)) ** 2

        def under_bottom(t):  # -g - 1
            return -kernel.rest(t) - 2.0 * np.cos(0.5 * theta(t)) ** 2

        pts = max(4096, 8 * freq)
        _, d_top, e1, _ = _periodic_max(over_top, (-math.pi, math.pi), pts)
        _, d_bottom, e2, _ = _periodic_max(under_bottom, (-math.pi, math.pi), pts)
        value = 0.5 * (d_top + d_bottom) if quotient else max(d_top, d_bottom)
        err = 64 * np.finfo(float).eps * max(abs(d_top), abs(d_bottom), 1e-300)
        return NormResult(float(value), float(err), e1 + e2)

    def excess_density(t):
        c, h = parts(t)
        g = c + h
        ac = np.abs(c)
        with np.errstate(divide="ignore", invalid="ignore"):
            same = (np.sign(g) == np.sign(c)) & (np.abs(h) <= 0.5 * ac)
            if q == 1:
                small = np.sign(c) * h
            else:
                small = ac ** q * np.expm1(q * np.log1p(h / c))
            big = np.abs(g) ** q - ac ** q
        return np.where(same, small, big)

    bp = _breakpoints(kernel, kernel.scaled, freq, level)
    res = integrate(excess_density, _kernel_cfg(kernel, cfg), breakpoints=bp)
    base = 4.0 if q == 1 else (math.pi if q == 2 else cos_norm_power(q))
    lead = cos_norm(q)
    delta = lead * math.expm1(math.log1p(res.value / base) / q)
    err = lead * res.error_estimate / (q * base) * (1.0 + abs(res.value) / base)
    return NormResult(delta, err, res.evaluations)


def _report(kernel, spec, n, q, ex, method, **extras) -> ErrorReport:
    lead = kernel.lead_coefficient
    scaled = (cos_norm(q) + ex.value) / math.pi
    return ErrorReport(value=lead * scaled, method=method,
                       quadrature_error=lead * ex.error_estimate / math.pi, n=n,
                       class_spec=spec, q=q, lead_coefficient=lead,
                       scaled_excess=ex.value / math.pi, extras=extras)


def eps_exact(spec: ClassSpec, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ErrorReport:
    """eps_n for the class by duality, evaluated by quadrature of the tail kernel.

    Uniform metric: (1/pi) min_c ||Psi_n - c||_{p'}; the zero-mean constraint
    on phi makes the dual norm a distance to the constants.  L_p metric on a
    p = 1 class: (1/pi) ||Psi_n||_p for finite p, and the uniform value for
    p = inf since the two quantities coincide.
    """
    q = dual_exponent(spec)
    _check_scope(spec, q)
    kernel = TailKernel(spec.psi, spec.phases, n)
    if not spec.uniform and not math.isinf(q):
        return _report(kernel, spec, n, q, harmonic_excess(kernel, q, cfg), "DualityQuadrature")
    if math.isinf(q):
        ex = harmonic_excess(kernel, q, cfg, quotient=True)
        return _report(kernel, spec, n, q, ex, "DualityQuadrature")
    level = best_level(kernel, q, cfg)
    ex = harmonic_excess(kernel, q, cfg, level=level)
    return _report(kernel, spec, n, q, ex, "DualityQuadrature", level=level)


def dual_norm(spec: ClassSpec, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ErrorReport:
    """(1/pi) ||Psi_n||_q without the optimal constant (an upper bound in the uniform metric)."""
    q = dual_exponent(spec)
    _check_scope(spec, q)
    kernel = TailKernel(spec.psi, spec.phases, n)
    return _report(kernel, spec, n, q, harmonic_excess(kernel, q, cfg), "DualityQuadrature")


def eps_direct(spec: ClassSpec, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ErrorReport:
    """Same quantity as ``eps_exact`` but as a plain L_q norm of the kernel.

    Loses the excess below double resolution; kept as an independent check.
    """
    q = dual_exponent(spec)
    _check_scope(spec, q)
    kernel = TailKernel(spec.psi, spec.phases, n)
    lead = kernel.lead_coefficient
    res = lq_norm(kernel.scaled, q, _kernel_cfg(kernel, cfg), breakpoints=[0.0],
                  frequency=kernel.frequency())
    return ErrorReport(value=lead * res.value / math.pi, method="DualityQuadrature",
                       quadrature_error=lead * res.error_estimate / math.pi, n=n,
                       class_spec=spec, q=q, lead_coefficient=lead,
                       scaled_excess=(res.value - cos_norm(q)) / math.pi)


def eps_l2_closed_form(r: float, n: int) -> float:
    """(1/sqrt(pi)) (sum_{k >= n} k^(-2r))^(1/2) = sqrt(zeta(2r, n) / pi)."""
    if not r > 0.5:
        raise DomainError(f"closed form needs r > 1/2, got {r}")
    if n < 1:
        raise DomainError("n must be >= 1")
    # zeta(2r, n) > n^(-2r), so this tolerance is relative
    return math.sqrt(hurwitz_zeta(2.0 * r, n, 1e-13 * float(n) ** (-2.0 * r)) / math.pi)


def eps_l2_integral_form(r: float, n: int, tol: float = 1e-12) -> float:
    """Same value from the integral representation of zeta(2r, n).

    ``tol`` is relative to n^(-2r), a lower bound for zeta(2r, n).
    """
    if not r > 0.5:
        raise DomainError(f"integral form needs r > 1/2, got {r}")
    if n < 1:
        raise DomainError("n must be >= 1")
    return math.sqrt(hurwitz_zeta_integral(2.0 * r, n, tol * float(n) ** (-2.0 * r)) / math.pi)


def tail_sum_power(r: float, n: int, tol: float = 1e-12) -> float:
    """sum_{k > n} k^(-r)."""
    if not r > 1:
        raise DomainError(f"tail sum needs r > 1, got {r}")
    return hurwitz_zeta(r, n + 1, tol)


def lower_bound_witness(spec: ClassSpec, n: int) -> float:
    """Leading term psi(n) ||cos||_q / pi of the worst-case error."""
    q = dual_exponent(spec)
    return float(spec.psi(n)) * cos_norm(q) / math.pi


def single_harmonic_achieved(spec: ClassSpec, n: int) -> float:
    """Error attained by phi = cos(n .) / ||cos||_p (an admissible function)."""
    psi_n = float(spec.psi(n))
    if spec.uniform:
        return psi_n / cos_norm(spec.p)
    return psi_n * cos_norm(spec.metric) / cos_norm(1.0)


def achieved_at(spec: ClassSpec, n: int, phi, x: float = 0.0,
                cfg: QuadratureConfig = DEFAULT_CONFIG, breakpoints=None) -> float:
    """|f - S_{n-1} f|(x) for f generated by ``phi`` (assumed in U_p^0)."""
    kernel = TailKernel(spec.psi, spec.phases, n)
    val = convolve_with_phi(kernel.scaled, phi, x, breakpoints=breakpoints,
                            cfg=_kernel_cfg(kernel, cfg))
    return kernel.lead_coefficient * abs(val)


def _bump(width):
    def b(u):
        u = np.asarray(u, dtype=float)
        u = np.mod(u + math.pi, 2 * math.pi) - math.pi
        inside = np.abs(u) < width
        return np.where(inside, (1.0 + np.cos(math.pi * u / width)) / (2.0 * width), 0.0)
    return b


def extremal_oracle(spec: ClassSpec, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ErrorReport:
    """Build a near-extremal phi and evaluate the error it attains.

    Uniform metric, finite q: phi(-t) = |g - c|^(q-1) sgn(g - c), normalised
    in L_p, where g = Psi_n / psi(n) and c is the optimal constant (which is
    exactly what makes phi zero-mean; any residual mean is projected out).
    Uniform metric, q = inf (p = 1): half a bump at the maximum of g minus half
    a bump at its minimum; bumps are raised cosines of half-width pi / (8 M).
    L_p metric (p = 1 class): the same bump pair, a half-period apart, except
    for L_inf which is treated like the uniform metric.
    The uniform-metric error is read at x = 0, where phi is aligned, which
    bounds the sup over x from below.
    """
    q = dual_exponent(spec)
    _check_scope(spec, q)
    kernel = TailKernel(spec.psi, spec.phases, n)
    kcfg = _kernel_cfg(kernel, cfg)
    exact = eps_exact(spec, n, cfg)
    g = kernel.scaled
    lead = kernel.lead_coefficient
    freq = kernel.frequency()
    extras = {}

    if math.isinf(q) or not spec.uniform:
        width = math.pi / (8.0 * max(freq, n))
        bump = _bump(width)
        pts = max(4096, 8 * freq)
        sup_metric = spec.uniform or math.isinf(spec.metric)
        if sup_metric:
            a, _, _, _ = _periodic_max(g, (-math.pi, math.pi), pts)
            b, _, _, _ = _periodic_max(lambda t: -g(t), (-math.pi, math.pi), pts)
        else:
            a, b = 0.0, math.pi / n
        if abs(math.remainder(a - b, 2 * math.pi)) < 2 * width:
            raise ToleranceError("bump supports overlap; kernel too flat for the oracle")
        nodes, weights = np.polynomial.legendre.leggauss(40)
        v = width * nodes
        wb = width * weights * bump(v)

        def f_conv(x):
            # (1/pi) int phi(x - t) g(t) dt with phi(u) = (bump(u + a) - bump(u + b)) / 2
            x = np.asarray(x, dtype=float)
            ga = g(np.add.outer(x + a, -v).ravel()).reshape(x.size, v.size)
            gb = g(np.add.outer(x + b, -v).ravel()).reshape(x.size, v.size)
            return 0.5 * ((ga - gb) @ wb) / math.pi

        if sup_metric:
            achieved, err = abs(float(f_conv(np.array([0.0]))[0])), 0.0
        else:
            res = lq_norm(f_conv, spec.metric, kcfg, breakpoints=[-a, -b], frequency=freq)
            achieved, err = res.value, res.error_estimate
        extras.update(bump_half_width=width, bump_centres=(a, b))
    else:
        level = exact.extras.get("level", 0.0)
        bp = _breakpoints(kernel, g, freq, level)
        mirrored = [-t for t in bp]
        two_pi = 2.0 * math.pi

        def raw(u):
            y = g(-np.asarray(u, dtype=float)) - level
            return np.sign(y) * np.abs(y) ** (q - 1.0)

        mean = integrate(raw, kcfg, breakpoints=mirrored).value / two_pi
        centred = lambda u: raw(u) - mean  # noqa: E731
        if math.isinf(spec.p):
            norm = 1.0 + abs(mean)
        else:
            norm = lq_norm(centred, spec.p, kcfg, breakpoints=mirrored, frequency=freq).value
        phi = lambda u: centred(u) / norm  # noqa: E731
        achieved = abs(convolve_with_phi(g, phi, 0.0, breakpoints=bp, cfg=kcfg))
        err = 0.0
        extras.update(level=level, mean_before_projection=mean)

    value = lead * achieved
    return ErrorReport(value=value, method="ExtremalOracle", quadrature_error=lead * err,
                       n=n, class_spec=spec, q=q, lead_coefficient=lead,
                       scaled_excess=achieved - cos_norm(q) / math.pi,
                       gap=exact.value - value, extras=extras)
