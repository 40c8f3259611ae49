"""Adaptive integrals and L_q norms of 2*pi-periodic functions.

All function handles are vectorized: they take a 1-d float array and
return an array of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, ToleranceError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-12
    max_depth: int = 30
    base_panels: int = 64
    max_evals: int = 4_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be >= 1")
        if self.base_panels < 8:
            raise DomainError("base_panels must be >= 8")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class NormResult:
    value: float
    error_estimate: float
    evaluations: int


def _rule(f, a, b):
    """10-point Gauss-Legendre on each panel and on its two halves.

    Returns (coarse, fine, fine_abs) per panel.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    quarter = 0.5 * half
    x_whole = mid[:, None] + half[:, None] * _GL_X
    x_left = (mid - quarter)[:, None] + quarter[:, None] * _GL_X
    x_right = (mid + quarter)[:, None] + quarter[:, None] * _GL_X
    pts = np.concatenate([x_whole, x_left, x_right], axis=1)
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    m = _GL_X.size
    coarse = half * (vals[:, :m] @ _GL_W)
    fine = quarter * (vals[:, m:2 * m] @ _GL_W + vals[:, 2 * m:] @ _GL_W)
    fine_abs = quarter * (np.abs(vals[:, m:2 * m]) @ _GL_W
                          + np.abs(vals[:, 2 * m:]) @ _GL_W)
    return coarse, fine, fine_abs, pts.size


def _initial_panels(a, b, breakpoints, base_panels):
    edges = [a, b]
    if breakpoints is not None:
        edges.extend(float(x) for x in np.ravel(breakpoints) if a < x < b)
    edges = np.unique(np.asarray(edges, dtype=float))
    # drop slivers created by breakpoints that coincide in floating point
    keep = np.concatenate([[True], np.diff(edges) > 1e-14 * max(1.0, b - a)])
    edges = edges[keep]
    edges[-1] = b
    lefts, rights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(1, int(math.ceil(base_panels * (hi - lo) / (b - a))))
        grid = np.linspace(lo, hi, k + 1)
        lefts.append(grid[:-1])
        rights.append(grid[1:])
    return np.concatenate(lefts), np.concatenate(rights)


def integrate(f, cfg: QuadratureConfig = DEFAULT_CONFIG, a: float = -math.pi,
              b: float = math.pi, breakpoints=None) -> NormResult:
    """Signed integral of ``f`` over [a, b] by globally adaptive bisection.

    Panels are split where the coarse/fine discrepancy is largest until the
    summed discrepancy is below ``max(abs_tol, rel_tol * int|f|)``.
    ``breakpoints`` are forced panel edges (kinks, jumps, cusps).
    """
    if not b > a:
        raise DomainError("integration interval must have b > a")
    lo, hi = _initial_panels(a, b, breakpoints, cfg.base_panels)
    depth = np.zeros(lo.size, dtype=int)
    coarse, fine, fine_abs, evals = _rule(f, lo, hi)
    err = np.abs(fine - coarse)
    while True:
        total = math.fsum(fine)
        total_err = float(err.sum())
        tol = max(cfg.abs_tol, cfg.rel_tol * float(fine_abs.sum()))
        if total_err <= tol:
            return NormResult(total, total_err, evals)
        target = tol / err.size
        split = (err > target) & (depth < cfg.max_depth)
        if not split.any() or evals > cfg.max_evals:
            raise ToleranceError(
                f"integral tolerance {tol:.3g} not met (estimate {total_err:.3g})",
                estimate=total, error=total_err)
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_depth = np.concatenate([depth[split], depth[split]]) + 1
        c2, f2, a2, ev = _rule(f, new_lo, new_hi)
        evals += ev
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        depth = np.concatenate([depth[keep], new_depth])
        fine = np.concatenate([fine[keep], f2])
        fine_abs = np.concatenate([fine_abs[keep], a2])
        err = np.concatenate([err[keep], np.abs(f2 - c2)])
        order = np.argsort(lo, kind="stable")
        lo, hi, depth = lo[order], hi[order], depth[order]
        fine, fine_abs, err = fine[order], fine_abs[order], err[order]


def sign_changes(f, a: float = -math.pi, b: float = math.pi,
                 points: int = 1024) -> list[float]:
    """Zeros of ``f`` located by a uniform scan and Brent refinement."""
    x = np.linspace(a, b, points + 1)
    y = np.asarray(f(x), dtype=float)
    roots = list(x[y == 0.0])
    idx = np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]

    def scalar(t):
        return float(f(np.array([t]))[0])

    for i in idx:
        fa, fb = scalar(x[i]), scalar(x[i + 1])
        if fa * fb > 0:
            # scalar and vector evaluation disagree in the last bit near a zero
            roots.append(x[i] if abs(fa) < abs(fb) else x[i + 1])
            continue
        roots.append(brentq(scalar, x[i], x[i + 1], xtol=1e-15, rtol=1e-15))
    return sorted(roots)


def _periodic_max(f, period, points, candidates=5):
    a, b = period
    x = np.linspace(a, b, points, endpoint=False)
    y = np.asarray(f(x), dtype=float)
    left, right = np.roll(y, 1), np.roll(y, -1)
    peaks = np.nonzero((y >= left) & (y >= right))[0]
    if peaks.size == 0:
        peaks = np.array([int(np.argmax(y))])
    peaks = peaks[np.argsort(-y[peaks], kind="stable")][:candidates]
    h = (b - a) / points
    best_x, best_y, evals = x[peaks[0]], y[peaks[0]], points

    def neg(t):
        return -float(f(np.array([t]))[0])

    for i in peaks:
        xi = x[i]
        lo, hi = xi - h, xi + h
        if y[i] <= max(left[i], right[i]):
            # flat top: nothing for golden section to do
            cand_x, cand_y = xi, y[i]
        else:
            res = minimize_scalar(neg, bracket=(lo, xi, hi), method="golden",
                                  tol=1e-12)
            evals += res.nfev
            cand_x, cand_y = float(res.x), -float(res.fun)
            if cand_y < y[i]:
                cand_x, cand_y = xi, y[i]
        if cand_y > best_y:
            best_x, best_y = cand_x, cand_y
    return best_x, best_y, evals, h


def lq_norm(f, q: float, cfg: QuadratureConfig = DEFAULT_CONFIG,
            breakpoints=None, frequency: int = 1,
            period=(-math.pi, math.pi)) -> NormResult:
    """L_q norm of a periodic function over one period, q in [1, inf].

    ``frequency`` is the highest harmonic that matters; the scan used to find
    sign changes (finite q) or peak candidates (q = inf) is sized from it.
    """
    if not q >= 1:
        raise DomainError(f"norm exponent must be >= 1, got {q}")
    a, b = period
    if math.isinf(q):
        points = max(4096, 8 * frequency)
        _, top, evals, h = _periodic_max(lambda t: np.abs(f(t)), period, points)
        # local quadratic model: the golden search pins the peak well below h
        err = 64 * np.finfo(float).eps * max(top, 1.0)
        return NormResult(float(top), float(err), evals)
    bp = list(breakpoints) if breakpoints is not None else []
    bp.extend(sign_changes(f, a, b, points=max(1024, 8 * frequency)))
    if q == 1.0:
        res = integrate(lambda t: np.abs(f(t)), cfg, a, b, bp)
    else:
        res = integrate(lambda t: np.abs(f(t)) ** q, cfg, a, b, bp)
    if res.value <= 0.0:
        return NormResult(0.0, res.error_estimate ** (1.0 / q), res.evaluations)
    value = res.value ** (1.0 / q)
    err = value * res.error_estimate / (q * res.value)
    return NormResult(value, err, res.evaluations)
