"""Finite-antenna strategy construction from the asymptotic solution.

Three steps: solve the asymptotic design, round the on-beam fraction to the
two adjacent multiples of 1/m and keep the better one, and fall back to a
threshold-gated single beam when even one constant beam is more than the
asymptotic solution wants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .onoff import info_rate_infinity, sbar_infinity, solve_optimal_a
from .roots import bisect
from .spectra import SystemDims, lambda_of_t_from_ratio


@dataclass(frozen=True)
class StrategySpec:
    """A concrete transmission strategy for a finite antenna array.

    kind 'constant_beams': the s strongest beams are always on at per-beam
    power p_on = rho / s.  kind 'gated_single_beam': the strongest beam is
    on iff its normalized eigenvalue clears kappa, at p_on = rho/(m*sbar).
    kind 'off': transmitter silent.
    """

    kind: str
    s: int
    p_on: float
    kappa: float | None
    predicted_rate: float  # nats per dimension


def invert_sbar(target_sbar: float, y: float) -> float:
    """Threshold angle at which the limiting on-beam fraction equals the
    target; well defined because the fraction is strictly decreasing."""
    if not (0.0 < target_sbar <= 1.0):
        raise ValueError(f"target on-beam fraction must lie in (0, 1], got {target_sbar}")
    if target_sbar == 1.0:
        return 0.0
    return bisect(lambda a: sbar_infinity(a, y) - target_sbar, 0.0, math.pi,
                  f_lo=1.0 - target_sbar, xtol=1e-13)


def finite_design(dims: SystemDims, rho: float) -> StrategySpec:
    """Best on/off strategy for a finite array at SNR rho."""
    y = dims.y
    m = dims.m
    point = solve_optimal_a(y, rho)

    if point.sbar >= 1.0 / m:
        s_lo = max(1, math.floor(m * point.sbar))
        s_hi = min(m, math.ceil(m * point.sbar))
        best_s, best_rate = None, -math.inf
        for s in sorted({s_lo, s_hi}):
            a_s = invert_sbar(s / m, y)
            rate_s = info_rate_infinity(a_s, y, rho)
            if rate_s > best_rate:
                best_s, best_rate = s, rate_s
        return StrategySpec(kind="constant_beams", s=best_s, p_on=rho / best_s,
                            kappa=None, predicted_rate=best_rate)

    kappa = lambda_of_t_from_ratio(point.a, y)
    return StrategySpec(kind="gated_single_beam", s=1,
                        p_on=rho / (m * point.sbar), kappa=kappa,
                        predicted_rate=point.rate)
