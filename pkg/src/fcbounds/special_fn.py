"""Special functions: complete elliptic integral K, Hurwitz zeta, Gamma.

Real arguments only. Everything here is pure and thread-safe.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, ToleranceError
from .quadrature import QuadratureConfig, integrate

DEFAULT_TOL = 1e-12

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _lanczos(x: float) -> float:
    # valid for x >= 0.5
    x -= 1.0
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    # split the power so that t**(x+0.5) cannot overflow before exp(-t) damps it
    half = t ** (0.5 * (x + 0.5))
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * acc


def _gamma_real(x: float) -> float:
    """Gamma on the real line minus the poles (reflection below 1/2)."""
    if x == math.floor(x) and x <= 0:
        raise DomainError(f"Gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * _lanczos(1.0 - x))
    if x == math.floor(x) and x <= 23:
        return float(math.factorial(int(x) - 1))
    return _lanczos(x)


def gamma_fn(s: float) -> float:
    """Gamma(s) for s > 0 (Lanczos, exact factorials at small integers)."""
    if not s > 0:
        raise DomainError(f"gamma_fn requires s > 0, got {s}")
    if s > 171.6:
        raise DomainError("gamma_fn overflows double precision for s > 171.6")
    return _gamma_real(s)


def elliptic_k(q: float, tol: float = DEFAULT_TOL) -> float:
    """Complete elliptic integral of the first kind K(q), q the modulus.

    Uses K(q) = pi / (2 AGM(1, sqrt(1 - q^2))).
    """
    if not (0.0 <= q < 1.0):
        raise DomainError(f"elliptic_k requires 0 <= q < 1, got {q}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    a, b = 1.0, math.sqrt((1.0 - q) * (1.0 + q))
    for _ in range(64):
        if abs(a - b) <= 4 * np.finfo(float).eps * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    value = math.pi / (a + b)
    # the AGM has converged to rounding level; what is left is roundoff
    err = 8 * np.finfo(float).eps * value
    if err > tol:
        raise ToleranceError(f"elliptic_k cannot certify tol={tol:g}",
                             estimate=value, error=err)
    return value


# ---------------------------------------------------------------- Bernoulli

@lru_cache(maxsize=None)
def bernoulli_numbers(count: int) -> tuple[Fraction, ...]:
    """B_0 .. B_{count-1} with the B_1 = -1/2 convention."""
    b = [Fraction(0)] * count
    for m in range(count):
        a = [Fraction(0)] * (m + 1)
        for j in range(m + 1):
            a[j] = Fraction(1, j + 1)
            for k in range(j, 0, -1):
                a[k - 1] = k * (a[k - 1] - a[k])
        b[m] = a[0]
    if count > 1:
        b[1] = Fraction(-1, 2)
    return tuple(b)


def bernoulli_poly(j: int, x: float) -> float:
    bn = bernoulli_numbers(j + 1)
    return math.fsum(math.comb(j, k) * float(bn[k]) * x ** (j - k)
                     for k in range(j + 1))


# -------------------------------------------------------------- Hurwitz zeta

_EM_TERMS = 4
_B = bernoulli_numbers(2 * _EM_TERMS + 3)
_EM_COEF = tuple(float(_B[2 * j]) / math.factorial(2 * j)
                 for j in range(1, _EM_TERMS + 2))


def _rising(s: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= s + i
    return out


def _hurwitz_em(s: float, a: float, tol: float) -> float:
    """Euler-Maclaurin evaluation valid for real s > 0, s != 1, a > 0.

    For s > 0 the derivatives of (a + x)^(-s) alternate in sign and decrease
    in magnitude, so the remainder after the last correction is bounded by
    the first omitted term.
    """
    block = max(20, math.ceil(s))
    while True:
        x = a + block
        omitted = abs(_EM_COEF[_EM_TERMS] * _rising(s, 2 * _EM_TERMS + 1)
                      * x ** (-s - 2 * _EM_TERMS - 1))
        if omitted <= tol or block > 1 << 22:
            break
        block *= 2
    if omitted > tol:
        raise ToleranceError("Euler-Maclaurin remainder above tol",
                             error=omitted)
    m = np.arange(block - 1, -1, -1, dtype=float)
    head = math.fsum(((a + m) ** -s).tolist())
    tail = [x ** (1.0 - s) / (s - 1.0), 0.5 * x ** -s]
    for j in range(1, _EM_TERMS + 1):
        tail.append(_EM_COEF[j - 1] * _rising(s, 2 * j - 1) * x ** (-s - 2 * j + 1))
    return head + math.fsum(tail)


def hurwitz_zeta(s: float, l: float, tol: float = DEFAULT_TOL) -> float:
    """zeta(s, l) = sum_{m >= 0} (l + m)^(-s) for real s > 1, l > 0."""
    if not (s > 1 and l > 0):
        raise DomainError(f"hurwitz_zeta requires s > 1 and l > 0, got s={s}, l={l}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    return _hurwitz_em(s, l, tol)


def riemann_zeta(x: float) -> float:
    """Riemann zeta on the real line, x != 1 (reflection for x < 0)."""
    if x == 1.0:
        raise DomainError("zeta has a pole at 1")
    if x > 1:
        return _hurwitz_em(x, 1.0, 1e-17)
    if x == 0.0:
        return -0.5
    if x > 0:
        return _hurwitz_em(x, 1.0, 1e-17)
    if x == math.floor(x) and int(x) % 2 == 0:
        return 0.0
    return (2.0 ** x * math.pi ** (x - 1.0) * math.sin(0.5 * math.pi * x)
            * _gamma_real(1.0 - x) * riemann_zeta(1.0 - x))


def zeta_regular_part(delta: float) -> float:
    """zeta(1 + delta) - 1/delta for |delta| <= 1/2, without cancellation.

    Euler-Maclaurin from x = 21, where the pole term x^(-delta)/delta is
    combined with -1/delta into expm1(-delta ln x)/delta.
    """
    if not abs(delta) <= 0.5:
        raise DomainError(f"zeta_regular_part needs |delta| <= 1/2, got {delta}")
    s = 1.0 + delta
    block = 20
    x = float(block + 1)
    k = np.arange(block, 0, -1, dtype=float)
    head = math.fsum((k ** -s).tolist())
    lx = math.log(x)
    pole = -lx if delta == 0 else math.expm1(-delta * lx) / delta
    tail = [pole, 0.5 * x ** -s]
    for j in range(1, _EM_TERMS + 1):
        tail.append(_EM_COEF[j - 1] * _rising(s, 2 * j - 1) * x ** (-s - 2 * j + 1))
    return head + math.fsum(tail)


def log_gamma_1p(delta: float) -> float:
    """ln Gamma(1 + delta) for |delta| <= 1/4 from its zeta series."""
    if not abs(delta) <= 0.25:
        raise DomainError(f"log_gamma_1p needs |delta| <= 1/4, got {delta}")
    euler_gamma = 0.57721566490153286061
    terms = [-euler_gamma * delta]
    for k in range(2, 40):
        term = (-delta) ** k * riemann_zeta(float(k)) / k
        terms.append(term)
        if abs(term) < 1e-18 * max(abs(delta), 1e-300):
            break
    return math.fsum(terms)


_NEAR_ZERO = 1e-2


def hurwitz_zeta_integral(s: float, l: float, tol: float = DEFAULT_TOL) -> float:
    """zeta(s, l) from its Mellin-type integral representation.

    (1/Gamma(s)) * int_0^inf t^(s-1) e^(-l t) / (1 - e^(-t)) dt, with
    [0, 0.01] done by the Bernoulli-polynomial expansion
    t e^((1-l)t) / (e^t - 1) = sum_j B_j(1 - l) t^j / j!, and the upper limit
    cut where an incomplete-Gamma bound puts the tail under tol / 10.
    """
    if not (s > 1 and l > 0):
        raise DomainError(f"hurwitz_zeta_integral requires s > 1 and l > 0, got s={s}, l={l}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if s > 170:
        raise DomainError("s too large for the Gamma normalisation")
    log_gamma = math.log(gamma_fn(s))
    d = _NEAR_ZERO
    near = []
    for j in range(200):
        term = (bernoulli_poly(j, 1.0 - l) / math.factorial(j)
                * math.exp((s - 1.0 + j) * math.log(d) - log_gamma) / (s - 1.0 + j))
        near.append(term)
        if j > 2 and abs(term) < 1e-3 * tol:
            break
    near_part = math.fsum(near)

    def tail_bound(upper):
        x = l * upper
        if x <= 2 * (s - 1):
            return math.inf
        # Gamma(s, x) <= 2 x^(s-1) e^(-x) once x >= 2(s - 1)
        log_b = math.log(2.0) + (s - 1.0) * math.log(x) - x - s * math.log(l) - log_gamma
        return math.exp(log_b) / (-math.expm1(-upper))

    upper = max(1.0, 2.0 * (s - 1.0) / l + 1.0)
    while tail_bound(upper) > 0.1 * tol:
        upper *= 1.5

    def integrand(t):
        return np.exp((s - 1.0) * np.log(t) - l * t - log_gamma) / -np.expm1(-t)

    cfg = QuadratureConfig(rel_tol=1e-14, abs_tol=0.1 * tol, base_panels=16)
    far = integrate(integrand, cfg, d, upper)
    return near_part + far.value
