"""Closed-form asymptotics for the full-CSI water-filling baseline.

The water level is parameterized by the Lagrange multiplier nu: eigenchannels
with limiting eigenvalue above 1/nu receive power nu - 1/lambda.  Both the
average power rho(nu) and the capacity C(nu) have closed forms in the same
variable-change constants as the on/off formulas; solve_nu inverts rho(nu)
by bisection.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import InfeasibleError, NumericsError
from .onoff import sbar_infinity
from .roots import bisect
from .special import dilog, sr2
from .spectra import support_from_ratio, t_of_lambda_from_ratio

_RESIDUE_TOL = 1e-9


@dataclass(frozen=True)
class WaterfillSolution:
    nu: float
    a: float
    rho: float  # achieved average power
    capacity: float  # nats per dimension


def a_of_nu(nu: float, y: float) -> float:
    """Threshold angle of the water level: lambda(a) = 1/nu on the support.

    Returns 0 when the level is above the whole spectrum (1/nu < lambda_minus)
    and pi at the zero-power boundary nu = 1/lambda_plus; below that the
    constraint is infeasible.
    """
    _check_y(y)
    if nu <= 0.0:
        raise InfeasibleError(f"nu must be positive, got {nu}")
    sup = support_from_ratio(y)
    if 1.0 / nu > sup.lambda_plus:
        raise InfeasibleError(
            f"nu={nu:.6g} puts the water level below the spectrum (zero power)")
    if 1.0 / nu < sup.lambda_minus:
        return 0.0
    return t_of_lambda_from_ratio(1.0 / nu, y)


def power_of_nu(nu: float, y: float) -> float:
    """Average power absorbed at water level nu; 0 at the infeasibility edge,
    continuous and strictly increasing."""
    a = a_of_nu(nu, y)
    sbar = sbar_infinity(a, y)
    r = math.sqrt(y)
    if y == 1.0:
        # the 2/tan(a/2) pole is real: the mean inverse eigenvalue diverges
        # as the level approaches the bottom of the square-case spectrum
        a = max(a, 1e-9)
        j4 = (a - math.pi + 2.0 / math.tan(0.5 * a)) / (2.0 * math.pi)
    else:
        theta_r = math.atan2(r * math.sin(a), 1.0 - r * math.cos(a))
        tail = 0.5j * (1.0 / (1.0 - r * cmath.exp(-1j * a))
                       - 1.0 / (1.0 - r * cmath.exp(1j * a)))
        j4 = ((r * r) / (1.0 - r * r) * (math.pi - a)
              - (1.0 + r * r) / (1.0 - r * r) * theta_r
              + _real_part(tail, "inverse-eigenvalue tail")) / math.pi
    return max(0.0, nu * sbar - j4)


def capacity_of_nu(nu: float, y: float) -> float:
    """Limiting capacity (nats/dimension) at water level nu."""
    a = a_of_nu(nu, y)
    sbar = sbar_infinity(a, y)
    r = math.sqrt(y)
    sin_a = math.sin(a)
    cos_a = math.cos(a)
    theta_r = math.atan2(r * sin_a, 1.0 - r * cos_a)

    j5 = (sin_a * (1.0 - math.log1p(r * r - 2.0 * r * cos_a))
          - r * (math.pi - a) - (1.0 / r - r) * theta_r) / (math.pi * r)

    phase = cmath.exp(1j * a)
    li = 1j * (dilog(r / phase) - dilog(r * phase))
    j6 = (1.0 + r * r) / (2.0 * math.pi * r * r) * _real_part(li, "dilog pair")

    total = math.log(nu / y) * sbar + j5 + j6
    if y < 1.0:
        log_m = cmath.log(1.0 - r / phase)
        log_p = cmath.log(1.0 - r * phase)
        inner = (0.5j * (log_m * log_m - log_p * log_p)
                 + 2.0 * math.log1p(-r * r) * (math.pi - a - theta_r)
                 + 1j * (sr2(r, -a) - sr2(r, a)))
        j7 = -(1.0 - r * r) / (2.0 * math.pi * r * r) * _real_part(inner, "sr2 pair")
        total += j7
    return max(0.0, total)


def solve_nu(rho: float, y: float) -> WaterfillSolution:
    """Water level matching average power rho; always solvable since
    power_of_nu is continuous, 0 at the edge, and unbounded above."""
    _check_y(y)
    if rho <= 0.0:
        raise InfeasibleError(f"rho must be positive, got {rho}")
    sup = support_from_ratio(y)
    lo = (1.0 + 1e-12) / sup.lambda_plus
    hi = max(2.0 * lo, 1.0)
    for _ in range(200):
        if power_of_nu(hi, y) > rho:
            break
        hi *= 2.0
    else:
        raise NumericsError(f"could not bracket the water level for rho={rho}")
    nu = bisect(lambda v: power_of_nu(v, y) - rho, lo, hi,
                f_lo=power_of_nu(lo, y) - rho, xtol=1e-13 * hi)
    return WaterfillSolution(nu=nu, a=a_of_nu(nu, y),
                             rho=power_of_nu(nu, y), capacity=capacity_of_nu(nu, y))


def _real_part(combo: complex, label: str) -> float:
    if abs(combo.imag) > _RESIDUE_TOL:
        raise NumericsError(f"{label}: imaginary residue {combo.imag:.3e} exceeds tolerance")
    return combo.real


def _check_y(y: float) -> None:
    if not (0.0 < y <= 1.0):
        raise ValueError(f"dimension ratio y must lie in (0, 1], got {y}")
