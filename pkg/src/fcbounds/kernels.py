"""Coefficient and phase sequences, (tail) kernels, partial Fourier sums.

A kernel here is the cosine series

    sum_{k >= n} psi(k) cos(k t - beta_k pi / 2)

and ``TailKernel`` with ``n = 1`` is the full kernel.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import DomainError, ToleranceError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate
from .special_fn import _gamma_real, log_gamma_1p, riemann_zeta, zeta_regular_part

# direct summation is used while the certified truncation index stays below this
DIRECT_LIMIT = 20_000
MAX_TERMS = 50_000_000


# ------------------------------------------------------------- sequences

class SmoothnessSeq(ABC):
    """Positive coefficients psi(k), k >= 1, with a certified tail bound."""

    @abstractmethod
    def __call__(self, k):
        ...

    @abstractmethod
    def tail_bound(self, m: int) -> float:
        """Upper bound for sum_{k > m} psi(k) (inf if not summable)."""

    @property
    def summable(self) -> bool:
        return math.isfinite(self.tail_bound(1))

    square_summable = True

    @property
    def power_tail(self):
        """(c, s, L) when psi(k) = c k^(-s) for all k > L, else None."""
        return None

    def truncation_index(self, start: int, tol: float) -> int:
        """Smallest M >= start (up to a factor 2) with tail_bound(M) <= tol."""
        if not self.summable:
            raise ToleranceError("series is not absolutely summable")
        m = max(start, 1)
        while self.tail_bound(m) > tol:
            m *= 2
            if m > MAX_TERMS:
                raise ToleranceError(f"no truncation index below {MAX_TERMS} meets tol={tol:g}")
        lo, hi = max(start, m // 2), m
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.tail_bound(mid) <= tol:
                hi = mid
            else:
                lo = mid
        return hi if self.tail_bound(lo) > tol else lo


@dataclass(frozen=True)
class PowerLaw(SmoothnessSeq):
    """psi(k) = k^(-r). Summable for r > 1; r in (1/2, 1] is square-summable only."""

    r: float

    def __post_init__(self):
        if not self.r > 0.5:
            raise DomainError(f"power-law exponent must exceed 1/2, got r={self.r}")

    def __call__(self, k):
        return np.asarray(k, dtype=float) ** -self.r

    def tail_bound(self, m: int) -> float:
        if self.r <= 1:
            return math.inf
        # sum_{k > m} k^-r < (m+1)^-r + int_{m+1}^inf t^-r dt
        m1 = m + 1.0
        return m1 ** -self.r + m1 ** (1.0 - self.r) / (self.r - 1.0)

    @property
    def power_tail(self):
        return (1.0, self.r, 0)

    @property
    def ident(self) -> str:
        return f"power:{self.r:g}"

    def to_dict(self):
        return {"power": self.r}


@dataclass(frozen=True)
class ExplicitPsi(SmoothnessSeq):
    """Listed head psi(1..L) continued by a geometric or power tail.

    ``tail`` is ``("geometric", rho)`` meaning psi(k) = psi(L) rho^(k-L), or
    ``("power", s)`` meaning psi(k) = psi(L) (L/k)^s, for k > L.
    """

    values: tuple
    tail: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "tail", (str(self.tail[0]), float(self.tail[1])))
        if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
            raise DomainError("explicit psi values must be positive and finite")
        kind, par = self.tail
        if kind == "geometric":
            if not 0 < par < 1:
                raise DomainError("geometric tail ratio must lie in (0, 1)")
        elif kind == "power":
            if not par > 1:
                raise DomainError("power tail exponent must exceed 1")
        else:
            raise DomainError(f"unknown tail rule {kind!r}")

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        n_head = len(self.values)
        head = np.asarray(self.values)
        last = self.values[-1]
        kind, par = self.tail
        inside = k <= n_head
        idx = np.clip(k.astype(int) - 1, 0, n_head - 1)
        if kind == "geometric":
            beyond = last * par ** (k - n_head)
        else:
            beyond = last * (n_head / k) ** par
        return np.where(inside, head[idx], beyond)

    def _rule_tail(self, m: int) -> float:
        # bound for sum_{k > m} of the rule, m >= L
        n_head = len(self.values)
        last = self.values[-1]
        kind, par = self.tail
        if kind == "geometric":
            return last * par ** (m + 1 - n_head) / (1.0 - par)
        m1 = m + 1.0
        return last * n_head ** par * (m1 ** -par + m1 ** (1.0 - par) / (par - 1.0))

    @property
    def power_tail(self):
        if self.tail[0] != "power":
            return None
        n_head = len(self.values)
        return (self.values[-1] * n_head ** self.tail[1], self.tail[1], n_head)

    def tail_bound(self, m: int) -> float:
        n_head = len(self.values)
        if m >= n_head:
            return self._rule_tail(m)
        return math.fsum(self.values[m:]) + self._rule_tail(n_head)

    @property
    def ident(self) -> str:
        return f"explicit[{len(self.values)}]+{self.tail[0]}:{self.tail[1]:g}"

    def to_dict(self):
        return {"explicit": list(self.values), "tail": {self.tail[0]: self.tail[1]}}


@dataclass(frozen=True)
class Stationary:
    beta: float

    head = ()

    @property
    def default(self) -> float:
        return self.beta

    def __call__(self, k):
        return np.full(np.shape(k), float(self.beta))

    @property
    def ident(self) -> str:
        return f"{self.beta:g}"

    def to_dict(self):
        return {"stationary": self.beta}


@dataclass(frozen=True)
class ExplicitPhases:
    """beta_k = values[k-1] for k <= len(values), ``default`` afterwards."""

    values: tuple
    default: float = 0.0

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(not math.isfinite(v) for v in vals) or not math.isfinite(self.default):
            raise DomainError("phases must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def head(self):
        return self.values

    def __call__(self, k):
        k = np.asarray(k)
        head = np.asarray(self.values + (self.default,))
        idx = np.clip(k.astype(int) - 1, 0, len(self.values))
        return np.where(k <= len(self.values), head[idx], self.default)

    @property
    def ident(self) -> str:
        return f"seq[{len(self.values)}]+{self.default:g}"

    def to_dict(self):
        return {"explicit": list(self.values), "default": self.default}


PhaseSeq = Union[Stationary, ExplicitPhases]


# ------------------------------------------------------------- class spec

def _parse_exponent(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity"):
            return math.inf
        v = float(v)
    v = float(v)
    if not v >= 1:
        raise DomainError(f"exponent must lie in [1, inf], got {v}")
    return v


def _exponent_json(v: float):
    return "inf" if math.isinf(v) else v


@dataclass(frozen=True)
class ClassSpec:
    """The class C^psi_{beta,p} together with the metric of the error.

    ``metric`` is ``"uniform"`` or a float target exponent for L_p.
    """

    psi: SmoothnessSeq
    phases: PhaseSeq
    p: float
    metric: Union[str, float] = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "p", _parse_exponent(self.p))
        if self.metric != "uniform":
            object.__setattr__(self, "metric", _parse_exponent(self.metric))

    @property
    def uniform(self) -> bool:
        return self.metric == "uniform"

    def to_dict(self) -> dict:
        metric = "uniform" if self.uniform else {"Lp": _exponent_json(self.metric)}
        return {"psi": self.psi.to_dict(), "beta": self.phases.to_dict(),
                "p": _exponent_json(self.p), "metric": metric}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ClassSpec":
        psi_d = d["psi"]
        if "power" in psi_d:
            psi = PowerLaw(float(psi_d["power"]))
        elif "explicit" in psi_d:
            (kind, par), = psi_d["tail"].items()
            psi = ExplicitPsi(tuple(psi_d["explicit"]), (kind, par))
        else:
            raise DomainError(f"unrecognised psi config {psi_d!r}")
        beta_d = d.get("beta", {"stationary": 0.0})
        if "stationary" in beta_d:
            phases = Stationary(float(beta_d["stationary"]))
        elif "explicit" in beta_d:
            phases = ExplicitPhases(tuple(beta_d["explicit"]), float(beta_d.get("default", 0.0)))
        else:
            raise DomainError(f"unrecognised beta config {beta_d!r}")
        metric = d.get("metric", "uniform")
        if isinstance(metric, dict):
            metric = metric["Lp"]
        return cls(psi, phases, d.get("p", "inf"), metric)

    @classmethod
    def from_json(cls, text: str) -> "ClassSpec":
        return cls.from_dict(json.loads(text))


# ------------------------------------------------------------- polylog

@lru_cache(maxsize=256)
def _polylog_coefficients(s: float, integer: bool, terms: int = 90):
    """zeta(s - k) / k! for k = 0 .. terms-1 (the k = s-1 slot zeroed if integer)."""
    out = np.zeros(terms)
    for k in range(terms):
        x = s - k
        if integer and k == int(round(s)) - 1:
            continue
        out[k] = riemann_zeta(x) / math.factorial(k)
    return out


def _cexpm1(z):
    # exp(z) - 1 for complex z without cancellation
    x, y = np.real(z), np.imag(z)
    return (np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2) + 1j * np.exp(x) * np.sin(y)


def _near_pole_pair(delta: float, j: int, mu, log_neg_mu):
    """Gamma(1-s)(-mu)^(s-1) + zeta(s-j) mu^j / j! for s = j + 1 + delta, small delta.

    Both terms have a 1/delta pole; with C = j! (-1)^j Gamma(-j - delta) the
    sum is mu^j/j! [(C + 1/delta) e^(delta L) + (zeta(1+delta) - 1/delta)
    - expm1(delta L)/delta], L = log(-mu), and every bracket is formed
    without cancellation.
    """
    x = math.pi * delta
    sinc_m1 = math.fsum((-1) ** k * x ** (2 * k) / math.factorial(2 * k + 1) for k in range(1, 12))
    log_r = -math.log1p(sinc_m1) - (log_gamma_1p(delta)
                                    + math.fsum(math.log1p(delta / i) for i in range(1, j + 1)))
    c_plus = -math.expm1(log_r) / delta
    dl = delta * log_neg_mu
    bracket = c_plus * np.exp(dl) + zeta_regular_part(delta) - _cexpm1(dl) / delta
    return mu ** j / math.factorial(j) * bracket


def polylog_unit_circle(s: float, t):
    """Li_s(e^{it}) for real s > 1/2 and t in [-pi, pi] (complex array).

    Expansion in mu = i t around mu = 0, convergent for |t| < 2 pi:
    Li_s(e^mu) = Gamma(1-s)(-mu)^(s-1) + sum_k zeta(s-k) mu^k / k!, with the
    usual logarithmic replacement of the singular pair when s is an integer
    and a cancellation-free form of that pair when s is close to one.
    """
    t = np.asarray(t, dtype=float)
    m = int(round(s))
    delta = s - m
    integer = abs(delta) < 1e-12
    near = not integer and abs(delta) < 0.1 and m >= 1
    if integer:
        s = float(m)
    coef = _polylog_coefficients(float(s), integer or near)
    mu = 1j * t
    acc = np.zeros(t.shape, dtype=complex)
    for c in coef[::-1]:
        acc = acc * mu + c
    at = np.abs(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_neg_mu = np.log(at) - 0.5j * math.pi * np.sign(t)
        if integer:
            harmonic = math.fsum(1.0 / j for j in range(1, m))
            sing = mu ** (m - 1) / math.factorial(m - 1) * (harmonic - log_neg_mu)
        elif near:
            sing = _near_pole_pair(delta, m - 1, mu, log_neg_mu)
        else:
            # (-i t)^(s-1) on the principal branch
            phase = np.exp(-0.5j * math.pi * np.sign(t) * (s - 1.0))
            sing = _gamma_real(1.0 - s) * at ** (s - 1.0) * phase
        if s > 1:
            # at t = 0 only the zeta(s - j) mu^j / j! half survives
            at_zero = riemann_zeta(s) if near and m == 1 else 0.0
            sing = np.where(at == 0.0, at_zero, sing)
    return acc + sing


def _reduce(t):
    return np.mod(np.asarray(t, dtype=float) + math.pi, 2 * math.pi) - math.pi


def _direct_sum(t, ks, coeffs, phases, chunk=512):
    acc = np.zeros(t.shape)
    for i in range(0, ks.size, chunk):
        k = ks[i:i + chunk]
        arg = np.multiply.outer(t, k) - 0.5 * math.pi * phases[i:i + chunk]
        acc += np.cos(arg) @ coeffs[i:i + chunk]
    return acc


# ------------------------------------------------------------- kernels

@dataclass(frozen=True)
class TailKernel:
    """sum_{k >= n} psi(k) cos(k t - beta_k pi / 2)."""

    psi: SmoothnessSeq
    phases: PhaseSeq
    n: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"kernel start index must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    def _uses_polylog(self, start: int, tol: float) -> bool:
        if self.psi.power_tail is None:
            return False
        if not self.psi.summable:
            return True
        m = start
        while self.psi.tail_bound(m) > tol:
            m *= 2
            if m > DIRECT_LIMIT:
                return True
        return False

    def series(self, t, start: int, scale: float = 1.0, tol: float = 1e-13):
        """(1/scale) * sum_{k >= start} psi(k) cos(k t - beta_k pi/2), error <= tol."""
        t = _reduce(t)
        out = np.zeros(t.shape)
        # explicit phases, and explicit values ahead of a power tail, are summed term by term
        tail = self.psi.power_tail
        stop = max(len(self.phases.head), tail[2] if tail is not None else 0)
        if start <= stop:
            ks = np.arange(start, stop + 1, dtype=float)
            out += _direct_sum(t, ks, self.psi(ks) / scale, self.phases(ks))
            start = stop + 1
        beta = self.phases.default
        if self._uses_polylog(start, tol * scale):
            c, s = tail[0], tail[1]
            li = polylog_unit_circle(s, t)
            with np.errstate(invalid="ignore"):
                full = np.real(np.exp(-0.5j * math.pi * beta) * li)
            ks = np.arange(1, start, dtype=float)
            head = _direct_sum(t, ks, ks ** -s, np.full(ks.size, beta)) if ks.size else 0.0
            return out + c * (full - head) / scale
        m = self.psi.truncation_index(start, tol * scale)
        ks = np.arange(start, m + 1, dtype=float)
        return out + _direct_sum(t, ks, self.psi(ks) / scale, np.full(ks.size, beta))

    def __call__(self, t, tol: float = 1e-13):
        return self.series(t, self.n, 1.0, tol)

    @property
    def lead_coefficient(self) -> float:
        return float(self.psi(self.n))

    @property
    def lead_shift(self) -> float:
        """Phase offset of the n-th harmonic: cos(n t - shift)."""
        return 0.5 * math.pi * float(self.phases(np.array([self.n]))[0])

    def lead(self, t):
        return np.cos(self.n * np.asarray(t, dtype=float) - self.lead_shift)

    def rest(self, t, tol: float = 1e-15):
        """sum_{k > n} (psi(k) / psi(n)) cos(...), the scaled remainder."""
        return self.series(t, self.n + 1, self.lead_coefficient, tol)

    def scaled(self, t, tol: float = 1e-15):
        """The kernel divided by psi(n)."""
        return self.lead(t) + self.rest(t, tol)

    def frequency(self) -> int:
        """Highest harmonic with weight above 1e-6 psi(n), capped for scans."""
        if not self.psi.summable:
            return 1024
        try:
            m = self.psi.truncation_index(self.n, 1e-6 * self.lead_coefficient)
        except ToleranceError:
            return 1024
        return int(min(max(m, self.n), 1024))

    def lead_zeros(self, a: float = -math.pi, b: float = math.pi):
        """Zeros of cos(n t - shift) inside [a, b]."""
        # n t - shift = pi/2 + j pi
        lo = math.ceil(((a * self.n - self.lead_shift) - 0.5 * math.pi) / math.pi)
        hi = math.floor(((b * self.n - self.lead_shift) - 0.5 * math.pi) / math.pi)
        j = np.arange(lo, hi + 1)
        return ((0.5 + j) * math.pi + self.lead_shift) / self.n


def eval_tail_kernel(kernel: TailKernel, t, tol: float = 1e-12):
    if not tol > 0:
        raise DomainError("tol must be positive")
    return kernel(t, tol)


# ------------------------------------------------------------- spectra

@dataclass(frozen=True)
class Spectrum:
    """a0/2 + sum_k (a[k-1] cos k t + b[k-1] sin k t)."""

    a0: float
    a: np.ndarray
    b: np.ndarray


def kernel_spectrum(psi: SmoothnessSeq, phases: PhaseSeq, kmax: int) -> Spectrum:
    k = np.arange(1, kmax + 1, dtype=float)
    theta = 0.5 * math.pi * phases(k)
    c = psi(k)
    return Spectrum(0.0, c * np.cos(theta), c * np.sin(theta))


def class_member_spectrum(psi: SmoothnessSeq, phases: PhaseSeq, phi: Spectrum) -> Spectrum:
    """Coefficients of (1/pi) int phi(x - t) Psi(t) dt for a trigonometric phi."""
    k = np.arange(1, phi.a.size + 1, dtype=float)
    theta = 0.5 * math.pi * phases(k)
    c = psi(k)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    return Spectrum(0.0, c * (phi.a * cos_t - phi.b * sin_t), c * (phi.a * sin_t + phi.b * cos_t))


def fourier_partial_sum(f: Spectrum, n: int, t):
    """S_{n-1}(f; t): the harmonics k < n of ``f``."""
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, 0.5 * f.a0)
    m = min(n - 1, f.a.size)
    if m <= 0:
        return out
    k = np.arange(1, m + 1, dtype=float)
    arg = np.multiply.outer(t, k)
    return out + np.cos(arg) @ f.a[:m] + np.sin(arg) @ f.b[:m]


def convolve_with_phi(kernel, phi, x: float, tol: float = 1e-12,
                      breakpoints=None, cfg: QuadratureConfig | None = None) -> float:
    """(1/pi) int_{-pi}^{pi} phi(x - t) kernel(t) dt by adaptive quadrature.

    ``kernel`` and ``phi`` are vectorized handles. The kernel singularity at
    t = 0 (small r) is always used as a panel edge.
    """
    cfg = cfg or QuadratureConfig(rel_tol=DEFAULT_CONFIG.rel_tol, abs_tol=tol)
    bp = [0.0] + (list(breakpoints) if breakpoints is not None else [])
    res = integrate(lambda t: phi(x - t) * kernel(t), cfg, breakpoints=bp)
    return res.value / math.pi
