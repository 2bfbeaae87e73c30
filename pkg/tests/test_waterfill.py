import math

import numpy as np
import pytest

from beamcap.errors import InfeasibleError
from beamcap.onoff import solve_optimal_a
from beamcap.waterfill import a_of_nu, capacity_of_nu, power_of_nu, solve_nu
from helpers import (waterfill_capacity_by_quadrature,
                     waterfill_power_by_quadrature)

NU_GRID = (0.3, 0.6, 1.2, 3.0, 12.0)


def test_a_of_nu_examples():
    # water level exactly at the top of the square-case spectrum
    assert abs(a_of_nu(0.25, 1.0) - math.pi) < 1e-12
    # level above the whole spectrum for y = 0.25 (lambda_minus = 1)
    assert a_of_nu(2.0, 0.25) == 0.0
    assert abs(a_of_nu(1.0, 1.0) - math.pi / 3.0) < 1e-12


def test_a_of_nu_infeasible():
    with pytest.raises(InfeasibleError):
        a_of_nu(0.2, 1.0)  # below 1/lambda_plus = 0.25
    with pytest.raises(InfeasibleError):
        a_of_nu(0.05, 0.5)


def test_power_matches_quadrature():
    for y in (0.25, 0.5, 0.75, 1.0):
        for nu in NU_GRID:
            a = a_of_nu(nu, y)
            closed = power_of_nu(nu, y)
            quad = waterfill_power_by_quadrature(nu, a, y)
            assert abs(closed - quad) < 1e-9, (y, nu)


def test_power_edge_cases():
    # just above the infeasibility edge the absorbed power vanishes
    assert power_of_nu(0.2500001, 1.0) < 1e-3
    # boundary level: empty integration range, zero power
    assert power_of_nu(0.25, 1.0) == 0.0
    # full-water regime for y < 1: rho = nu - y/(1-y) exactly
    assert abs(power_of_nu(11.0, 0.5) - (11.0 - 1.0)) < 1e-12


def test_power_strictly_increasing():
    for y in (0.5, 1.0):
        grid = np.linspace(1.0 / ((1.0 / math.sqrt(y) + 1) ** 2) + 1e-6, 20.0, 60)
        vals = [power_of_nu(float(nu), y) for nu in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_capacity_matches_quadrature():
    for y in (0.25, 0.5, 0.75, 1.0):
        for nu in NU_GRID:
            a = a_of_nu(nu, y)
            closed = capacity_of_nu(nu, y)
            quad = waterfill_capacity_by_quadrature(nu, a, y)
            assert abs(closed - quad) < 1e-9, (y, nu)


def test_capacity_monotone_and_vanishing():
    for y in (0.5, 1.0):
        caps = [capacity_of_nu(nu, y) for nu in NU_GRID]
        assert all(b > a for a, b in zip(caps, caps[1:]))
    # level at the top of the spectrum: nothing transmitted
    assert capacity_of_nu(0.2500000001, 1.0) < 1e-4


def test_solve_nu_round_trip():
    for y in (0.5, 1.0):
        for nu0 in (0.8, 2.0, 10.0):
            rho = power_of_nu(nu0, y)
            sol = solve_nu(rho, y)
            assert abs(sol.nu - nu0) <= 1e-8 * nu0
            assert abs(sol.rho - rho) <= 1e-10 * max(1.0, rho)


def test_capacity_dominates_onoff():
    for y in (0.5, 0.75, 1.0):
        for rho in (0.1, 1.0, 10.0, 100.0):
            cap = solve_nu(rho, y).capacity
            rate = solve_optimal_a(y, rho).rate
            assert rate <= cap + 1e-12
            assert rate >= 0.90 * cap  # near-optimality of on/off


def test_capacity_monotone_in_rho():
    assert solve_nu(1e-3, 1.0).capacity < solve_nu(1e-2, 1.0).capacity


def test_solve_nu_invalid():
    with pytest.raises(InfeasibleError):
        solve_nu(-1.0, 0.5)
