"""Series machinery behind the closed-form rate expressions.

Three ingredients: the dilogarithm on the closed unit disk, two custom
double series (``sr1``, ``sr2``) that absorb the lattice-sum parts of the
rate integrals, and the bundle of variable-change constants (alpha, w, u,
theta_r, theta_u) shared by every closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateInputError, DomainError, NumericsError

_PI2_6 = math.pi * math.pi / 6.0


def _bernoulli_log_coefficients(nmax: int):
    # exact Bernoulli numbers (B1 = -1/2 convention) via the defining
    # recurrence, then the coefficients of the log-argument expansion
    # Li2(z) = sum_n B_n * w^(n+1) / (n! * (n+1)),  w = -log(1-z)
    bern = [Fraction(0)] * (nmax + 1)
    bern[0] = Fraction(1)
    for n in range(1, nmax + 1):
        acc = Fraction(0)
        for k in range(n):
            acc += math.comb(n + 1, k) * bern[k]
        bern[n] = -acc / (n + 1)
    return [float(bern[n] / (math.factorial(n) * (n + 1))) for n in range(nmax + 1)]


_LOG_COEF = _bernoulli_log_coefficients(64)


def _dilog_power_series(z: complex) -> complex:
    total = 0j
    zn = z
    n = 1
    while True:
        term = zn / (n * n)
        total += term
        if abs(term) < 1e-18 * (1.0 + abs(total)):
            return total
        zn *= z
        n += 1
        if n > 1000:  # |z| <= 0.5 + eps needs ~60 terms
            raise NumericsError("dilogarithm power series stalled", estimate=total)


def _dilog_log_series(z: complex) -> complex:
    # valid for |w| < 2*pi; on our domain (|z| <= 1, away from z = 1 and
    # |z| <= 1/2) |w| stays below 1.8 and 64 terms reach machine precision
    w = -cmath.log(1.0 - z)
    total = 0j
    wp = w
    for c in _LOG_COEF:
        total += c * wp
        wp *= w
    return total


def dilog(z) -> complex:
    """Dilogarithm sum_{n>=1} z^n / n^2 for |z| <= 1.

    Direct series for small |z|; the reflection through 1-z near z = 1;
    a Bernoulli expansion in log(1-z) on the rest of the disk.  Absolute
    accuracy ~1e-14 everywhere on the closed disk.
    """
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise DomainError(f"dilog requires |z| <= 1, got |z| = {abs(z):.6g}")
    if z == 1.0:
        return complex(_PI2_6)
    if abs(z) <= 0.5:
        return _dilog_power_series(z)
    if abs(1.0 - z) <= 0.5:
        w = 1.0 - z
        return _PI2_6 - cmath.log(z) * cmath.log(w) - _dilog_power_series(w)
    return _dilog_log_series(z)


def _tail_factors(q: float, l_vals=None):
    """Geometric-over-linear sums phi(q, l) = sum_{j>=0} q^j / (l + j)."""
    if q <= 0.0:
        return None  # caller treats phi(0, l) = 1/l
    n_terms = max(8, int(math.ceil((math.log(1e-18) + math.log1p(-q)) / math.log(q))) + 1)
    if n_terms > 500_000:
        raise NumericsError(f"inner series modulus q={q:.6g} too close to 1")
    j = np.arange(n_terms, dtype=float)
    return j, q ** j


def _series_sum(r: float, t: float, coefficient):
    """sum_{l>=1} (r e^{it})^l / l * coefficient(l) with the stop rule:
    five consecutive outer terms below 1e-14 * (1 + |running sum|)."""
    z = r * cmath.exp(1j * t)
    zl = 1.0 + 0j
    total = 0j
    small = 0
    l = 0
    while small < 5:
        l += 1
        if l > 200_000:
            raise NumericsError("outer series modulus too close to 1", estimate=total)
        zl *= z
        term = zl / l * coefficient(l)
        total += term
        if abs(term) < 1e-14 * (1.0 + abs(total)):
            small += 1
        else:
            small = 0
    return total


def sr1(u: float, r: float, t: float) -> complex:
    """Double series coupling the moduli u (rate constant) and r = sqrt(y).

    Outer terms carry (r e^{it})^l / l; the inner weight is the partial sum
    of (u/r)^k/k below l plus the tail sum_{k>=l} u^k r^(k-2l) / k.  The two
    inner pieces are evaluated directly per l (prefix by accumulation, tail
    as (u/r)^l * phi(ur, l)); carrying the tail through the printed
    recurrence tail(l+1) = tail(l) - term(l) amplifies roundoff by r^(-2l)
    and loses the result entirely, so it is not used.
    """
    if not (abs(u) < 1.0 and abs(r) < 1.0):
        raise DomainError("sr1 requires |u| < 1 and |r| < 1")
    if r == 0.0 or abs(u / r) >= 1.0:
        raise DomainError("sr1 requires |u/r| < 1")
    if u == 0.0:
        return 0j

    p = u / r
    q = u * r
    tail = _tail_factors(q)
    head = 0.0  # sum_{k=1}^{l-1} p^k / k
    p_pow = 1.0  # p^(l-1)

    def coefficient(l: int) -> float:
        nonlocal head, p_pow
        if l > 1:
            p_pow *= p
            head += p_pow / (l - 1)
        if tail is None:
            phi = 1.0 / l
        else:
            j, qj = tail
            phi = float(np.sum(qj / (l + j)))
        return head + p_pow * p * phi

    return _series_sum(r, t, coefficient)


def sr2(r: float, t: float) -> complex:
    """Single-modulus companion of sr1: inner weight sum_{k>=l} r^(2k-2l)/k."""
    if not abs(r) < 1.0:
        raise DomainError("sr2 requires |r| < 1")
    if r == 0.0:
        return 0j
    tail = _tail_factors(r * r)

    def coefficient(l: int) -> float:
        if tail is None:
            return 1.0 / l
        j, qj = tail
        return float(np.sum(qj / (l + j)))

    return _series_sum(r, t, coefficient)


@dataclass(frozen=True)
class AuxQuantities:
    """Variable-change constants for one (y, sbar, rho, a) operating point.

    w and u are the two roots (after pulling out r) of
    x^2 - (1 + y + alpha) x + y, so that
    w * (1 + u^2 - 2 u cos t) = 1 + y + alpha - 2 sqrt(y) cos t for all t.
    """

    r: float
    alpha: float
    w: float
    u: float
    theta_r: float
    theta_u: float


def split_roots(y: float, alpha: float):
    """Return (w, u, r_minus_u) for the quadratic above.

    r - u collapses to 0 as alpha -> 0, so it is returned in the
    cancellation-free form 2*y*alpha / (r * (sqrt(disc) + 1 - y + alpha)).
    """
    if alpha <= 0.0:
        raise DegenerateInputError(f"alpha must be positive, got {alpha}")
    r = math.sqrt(y)
    b = 1.0 + y + alpha
    disc = (1.0 - y + alpha) ** 2 + 4.0 * y * alpha  # == b^2 - 4y, always >= 0
    root = math.sqrt(disc)
    w = 0.5 * (b + root)
    u = 0.5 * (b - root) / r
    r_minus_u = 2.0 * y * alpha / (r * (root + 1.0 - y + alpha))
    return w, u, r_minus_u


def aux_quantities(y: float, sbar: float, rho: float, a: float) -> AuxQuantities:
    if not (0.0 < y <= 1.0):
        raise ValueError(f"y must lie in (0, 1], got {y}")
    if sbar <= 0.0 or rho <= 0.0:
        raise DegenerateInputError("sbar and rho must be positive (alpha undefined otherwise)")
    if not (-1e-12 <= a <= math.pi + 1e-12):
        raise ValueError(f"a must lie in [0, pi], got {a}")
    alpha = sbar * y / rho
    w, u, _ = split_roots(y, alpha)
    r = math.sqrt(y)
    theta_r = math.atan2(r * math.sin(a), 1.0 - r * math.cos(a))
    theta_u = math.atan2(u * math.sin(a), 1.0 - u * math.cos(a))
    return AuxQuantities(r=r, alpha=alpha, w=w, u=u, theta_r=theta_r, theta_u=theta_u)
