"""Closed-form asymptotics of the power on/off strategy under perfect
beamforming: the on-beam fraction, the normalized information rate, its
derivative in the threshold angle, and the optimal-threshold solver.

All rates are in nats per dimension.  The threshold is the angle a in
[0, pi]: beams whose reparameterized eigenvalue coordinate t falls in
[a, pi] are on, so a = 0 means all beams on and a -> pi switches the
transmitter off.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NumericsError
from .roots import bisect
from .special import dilog, split_roots, sr1
from .spectra import t_density_from_ratio

_SOLVER_EDGE = 1e-6
_RESIDUE_TOL = 1e-9


@dataclass(frozen=True)
class DesignPoint:
    """One on/off operating point at SNR rho and dimension ratio y."""

    a: float
    sbar: float
    pbar_on: float  # normalized on-power rho / sbar
    rate: float  # nats per dimension
    rho: float
    y: float


def sbar_infinity(a: float, y: float) -> float:
    """Limiting on-beam fraction for threshold angle a; decreasing, 1 at a=0."""
    _check_a(a)
    _check_y(y)
    if y == 1.0:
        val = (math.pi - a - math.sin(a)) / math.pi
    else:
        r = math.sqrt(y)
        theta_r = math.atan2(r * math.sin(a), 1.0 - r * math.cos(a))
        val = (math.pi - a - math.sin(a) / r + (1.0 - r * r) / (r * r) * theta_r) / math.pi
    return min(1.0, max(0.0, val))


def _real_part(combo: complex, label: str) -> float:
    if abs(combo.imag) > _RESIDUE_TOL:
        raise NumericsError(f"{label}: imaginary residue {combo.imag:.3e} exceeds tolerance")
    return combo.real


def rate_from_alpha(a: float, y: float, alpha: float, sbar: float) -> float:
    """Closed form of the rate integral
    int_a^pi log(1 + (1/alpha) * (1 + y - 2 sqrt(y) cos t)) f_T(t) dt.

    ``sbar`` is the same integral with integrand 1 (supplied by the caller,
    which already has it).
    """
    _check_a(a)
    _check_y(y)
    w, u, _ = split_roots(y, alpha)
    r = math.sqrt(y)
    sin_a = math.sin(a)
    cos_a = math.cos(a)
    theta_r = math.atan2(r * sin_a, 1.0 - r * cos_a)
    theta_u = math.atan2(u * sin_a, 1.0 - u * cos_a)

    if u < 1e-8:
        # theta_u ~ u sin(a) / (1 - u cos(a)); the 1/u pole cancels
        theta_term = (1.0 - u * u) * sin_a / (1.0 - u * cos_a)
    else:
        theta_term = (1.0 / u - u) * theta_u
    j0 = (sin_a * (1.0 - math.log1p(u * u - 2.0 * u * cos_a))
          - u * (math.pi - a) - theta_term) / (math.pi * r)

    phase = cmath.exp(1j * a)
    li = 1j * (dilog(u / phase) - dilog(u * phase))
    j1 = (1.0 + r * r) / (2.0 * math.pi * r * r) * _real_part(li, "dilog pair")

    total = (math.log(w) - math.log(alpha)) * sbar + j0 + j1
    if y < 1.0:
        series = 1j * (sr1(u, r, a) - sr1(u, r, -a))
        j2 = (1.0 - r * r) / (2.0 * math.pi * r * r) * (
            -2.0 * math.log1p(-u * r) * (math.pi - a - theta_r)
            + _real_part(series, "sr1 pair")
        )
        total += j2
    return max(0.0, total)


def info_rate_infinity(a: float, y: float, rho: float) -> float:
    """Limiting rate (nats/dimension) of the on/off strategy at threshold a."""
    if rho <= 0.0:
        raise DegenerateInputError(f"rho must be positive, got {rho}")
    sbar = sbar_infinity(a, y)
    if sbar < 1e-12:
        raise DegenerateInputError(f"threshold a={a} leaves no beams on (sbar ~ 0)")
    alpha = sbar * y / rho
    return rate_from_alpha(a, y, alpha, sbar)


def info_rate_equal_power(y: float, pbar: float) -> float:
    """Rate with every beam on at normalized per-beam power pbar.

    The a = 0 evaluation with alpha = y / pbar; the receiver-only baseline
    at total power rho is pbar = m * rho / L_T.
    """
    if pbar <= 0.0:
        raise DegenerateInputError(f"pbar must be positive, got {pbar}")
    return rate_from_alpha(0.0, y, y / pbar, 1.0)


def dinfo_da(a: float, y: float, rho: float) -> float:
    """Derivative of info_rate_infinity in a (the alpha(a) dependence is
    already folded into the closed form; do not add chain-rule terms)."""
    if not (0.0 < a < math.pi):
        raise ValueError(f"a must lie in (0, pi), got {a}")
    _check_y(y)
    if rho <= 0.0:
        raise DegenerateInputError(f"rho must be positive, got {rho}")
    sbar = sbar_infinity(a, y)
    if sbar < 1e-300:
        raise DegenerateInputError(f"threshold a={a} leaves no beams on (sbar ~ 0)")
    alpha = sbar * y / rho
    w, u, r_minus_u = split_roots(y, alpha)
    r = math.sqrt(y)
    sin_a = math.sin(a)
    cos_a = math.cos(a)
    theta_u = math.atan2(u * sin_a, 1.0 - u * cos_a)

    if y == 1.0:
        if u < 1e-8:
            pole_term = (1.0 + u) * sin_a / (1.0 - u * cos_a)
        else:
            pole_term = (1.0 + u) * theta_u / u
        # r_minus_u equals 1 - u here (r = 1), in cancellation-free form
        i_d = (math.pi - a - pole_term) / (math.pi * w * r_minus_u)
    else:
        theta_r = math.atan2(r * sin_a, 1.0 - r * cos_a)
        if u < 1e-8:
            u_term = (1.0 - u * u) * sin_a / (r_minus_u * (1.0 - u * cos_a))
        else:
            u_term = (1.0 - u * u) * theta_u / (u * r_minus_u)
        r_term = (1.0 - r * r) * theta_r / (r * r_minus_u)
        i_d = (math.pi - a - u_term + r_term) / (math.pi * w * (1.0 - u * r))

    z_a = (1.0 + r * r - 2.0 * r * cos_a) / alpha
    f_t = t_density_from_ratio(a, y)
    return f_t * (1.0 - math.log1p(z_a) - (y / rho) * i_d)


def solve_optimal_a(y: float, rho: float) -> DesignPoint:
    """Optimal threshold angle: the unique sign change of dinfo_da if one
    exists on (0, pi), else 0 (all beams on)."""
    _check_y(y)
    if rho <= 0.0:
        raise DegenerateInputError(f"rho must be positive, got {rho}")
    lo = _SOLVER_EDGE
    hi = math.pi - _SOLVER_EDGE

    def deriv(a: float) -> float:
        # within ~1e-4 of pi the on-beam fraction underflows; the rate is
        # certainly falling there, so treat the point as negative
        try:
            return dinfo_da(a, y, rho)
        except DegenerateInputError:
            return -math.inf

    grid = np.linspace(lo, hi, 64)
    vals = [deriv(float(g)) for g in grid]

    a_opt = 0.0
    for i in range(len(grid) - 1):
        if vals[i] > 0.0 >= vals[i + 1]:
            a_opt = bisect(deriv, float(grid[i]), float(grid[i + 1]),
                           f_lo=vals[i], xtol=1e-10)
            break
    else:
        if vals[0] > 0.0:
            # derivative positive on the whole scan: maximum sits at the
            # right edge; the sign change guaranteed near pi is inside the
            # last scan cell only when rho is absurdly small
            a_opt = hi
    return _design_point(a_opt, y, rho)


def sweep_rho(y: float, rho_grid) -> list[DesignPoint]:
    """Optimal design points along an increasing SNR grid."""
    rho_grid = [float(r) for r in rho_grid]
    if any(r <= 0.0 for r in rho_grid):
        raise ValueError("rho grid must be positive")
    if any(b <= a for a, b in zip(rho_grid, rho_grid[1:])):
        raise ValueError("rho grid must be strictly increasing")
    return [solve_optimal_a(y, rho) for rho in rho_grid]


def _design_point(a: float, y: float, rho: float) -> DesignPoint:
    sbar = sbar_infinity(a, y)
    rate = info_rate_infinity(a, y, rho)
    return DesignPoint(a=a, sbar=sbar, pbar_on=rho / sbar, rate=rate, rho=rho, y=y)


def _check_a(a: float) -> None:
    if not (-1e-12 <= a <= math.pi + 1e-12):
        raise ValueError(f"a must lie in [0, pi], got {a}")


def _check_y(y: float) -> None:
    if not (0.0 < y <= 1.0):
        raise ValueError(f"dimension ratio y must lie in (0, 1], got {y}")
