"""Limiting eigenvalue spectrum of the normalized channel Gram matrix.

Everything here works in the normalization W = (1/m) * (smaller Gram matrix
of H), whose spectrum concentrates on [(sqrt(tau)-1)^2, (sqrt(tau)+1)^2] with
tau = n/m >= 1.  The trigonometric reparameterization lam(t) maps [0, pi]
onto that support and removes the square-root edge behavior, which is why all
closed forms downstream are stated in t.  The adaptive quadrature here is the
reference oracle those closed forms are tested against.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError


@dataclass(frozen=True)
class SystemDims:
    """Antenna geometry: tx transmit and rx receive antennas."""

    tx: int
    rx: int

    def __post_init__(self):
        if self.tx < 1 or self.rx < 1:
            raise ValueError(f"antenna counts must be >= 1, got {self.tx}x{self.rx}")

    @property
    def m(self) -> int:
        """System dimension min(tx, rx): number of parallel eigenchannels."""
        return min(self.tx, self.rx)

    @property
    def n(self) -> int:
        return max(self.tx, self.rx)

    @property
    def y(self) -> float:
        """Dimension ratio m/n in (0, 1]."""
        return self.m / self.n

    @property
    def tau(self) -> float:
        return self.n / self.m

    @property
    def r(self) -> float:
        """sqrt(y); the modulus that controls every series below."""
        return math.sqrt(self.y)


@dataclass(frozen=True)
class SpectralSupport:
    lambda_minus: float
    lambda_plus: float


def support_from_ratio(y: float) -> SpectralSupport:
    _check_ratio(y)
    s = math.sqrt(1.0 / y)
    return SpectralSupport((s - 1.0) ** 2, (s + 1.0) ** 2)


def mp_support(dims: SystemDims) -> SpectralSupport:
    """Support endpoints (sqrt(tau) -+ 1)^2 of the limiting spectrum."""
    return support_from_ratio(dims.y)


def mp_density_from_ratio(lam, y: float):
    """Limiting eigenvalue density; 0 outside the support.

    Vectorized over ``lam``.  The product under the radical is clamped at 0
    so roundoff just inside the support cannot produce NaN.
    """
    _check_ratio(y)
    sup = support_from_ratio(y)
    lam = np.asarray(lam, dtype=float)
    rad = np.maximum((sup.lambda_plus - lam) * (lam - sup.lambda_minus), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.sqrt(rad) / (2.0 * math.pi * lam)
    dens = np.where((lam > 0) & (rad > 0), dens, 0.0)
    if dens.ndim == 0:
        return float(dens)
    return dens


def mp_density(lam, dims: SystemDims):
    return mp_density_from_ratio(lam, dims.y)


def lambda_of_t_from_ratio(t, y: float):
    """Monotone map of t in [0, pi] onto the spectral support."""
    _check_ratio(y)
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-12) or np.any(t > math.pi + 1e-12):
        raise ValueError("t must lie in [0, pi]")
    out = (1.0 + y - 2.0 * math.sqrt(y) * np.cos(t)) / y
    if out.ndim == 0:
        return float(out)
    return out


def lambda_of_t(t, dims: SystemDims):
    return lambda_of_t_from_ratio(t, dims.y)


def t_of_lambda_from_ratio(lam: float, y: float) -> float:
    """Inverse of lambda_of_t, clamped to [0, pi] against roundoff."""
    arg = (1.0 + y - y * lam) / (2.0 * math.sqrt(y))
    return math.acos(min(1.0, max(-1.0, arg)))


def t_density_from_ratio(t, y: float):
    """Density of the reparameterized spectrum on [0, pi]; integrates to 1."""
    _check_ratio(y)
    t = np.asarray(t, dtype=float)
    if y == 1.0:
        out = (1.0 + np.cos(t)) / math.pi
    else:
        out = (1.0 - np.cos(2.0 * t)) / (math.pi * (1.0 + y - 2.0 * math.sqrt(y) * np.cos(t)))
    out = np.maximum(out, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def t_density(t, dims: SystemDims):
    return t_density_from_ratio(t, dims.y)


# 15-point Gauss-Kronrod rule on [-1, 1]; the embedded 7-point Gauss rule
# uses the odd-indexed nodes.  Standard published abscissae/weights.
_GK_NODES = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_GK_WEIGHTS = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_G_WEIGHTS = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])


def _gk_panel(f, a: float, b: float):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx = np.asarray(f(c + h * _GK_NODES), dtype=float)
    k15 = h * float(fx @ _GK_WEIGHTS)
    g7 = h * float(fx[1::2] @ _G_WEIGHTS)
    return k15, abs(k15 - g7)


def integrate(f, lo: float, hi: float, tol: float = 1e-10, max_depth: int = 60):
    """Globally adaptive Gauss-Kronrod quadrature of ``f`` over [lo, hi].

    ``f`` must accept an ndarray of evaluation points.  The worst panel (by
    the |K15 - G7| error estimate) is bisected until the summed estimate
    drops below ``tol``.  Endpoints are never evaluated, so integrable
    inverse-square-root edge singularities are handled by plain bisection.
    """
    lo = float(lo)
    hi = float(hi)
    if lo > hi:
        raise ValueError("integration bounds must satisfy lo <= hi")
    if lo == hi:
        return 0.0

    val, err = _gk_panel(f, lo, hi)
    # heap of (-err, counter, a, b, depth, value); counter breaks ties
    count = 0
    heap = [(-err, count, lo, hi, 0, val)]
    total_err = err
    while total_err > tol:
        neg_err, _, a, b, depth, v = heapq.heappop(heap)
        if depth >= max_depth:
            best = v + sum(item[5] for item in heap)
            raise NumericsError(
                f"quadrature did not converge to tol={tol:g} within depth {max_depth}",
                estimate=best,
            )
        c = 0.5 * (a + b)
        vl, el = _gk_panel(f, a, c)
        vr, er = _gk_panel(f, c, b)
        total_err += el + er - (-neg_err)
        count += 1
        heapq.heappush(heap, (-el, count, a, c, depth + 1, vl))
        count += 1
        heapq.heappush(heap, (-er, count, c, b, depth + 1, vr))
    return math.fsum(item[5] for item in heap)


def _check_ratio(y: float) -> None:
    if not (0.0 < y <= 1.0):
        raise ValueError(f"dimension ratio y must lie in (0, 1], got {y}")
