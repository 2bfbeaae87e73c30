import math

import numpy as np
import pytest

from beamcap.errors import DegenerateInputError
from beamcap.onoff import (dinfo_da, info_rate_equal_power, info_rate_infinity,
                           sbar_infinity, solve_optimal_a, sweep_rho)
from helpers import deriv_by_quadrature, rate_by_quadrature, sbar_by_quadrature

Y_GRID = (0.25, 0.5, 0.75, 1.0)
A_GRID = (0.3, 0.9, 1.6, 2.3, 2.9)


def test_sbar_endpoints():
    assert sbar_infinity(0.0, 1.0) == 1.0
    assert sbar_infinity(0.0, 0.4) == 1.0
    for y in Y_GRID:
        assert sbar_infinity(math.pi, y) == 0.0


def test_sbar_square_case_value():
    # (pi/2 - 1)/pi, also checked against the defining integral
    val = sbar_infinity(math.pi / 2, 1.0)
    assert abs(val - (math.pi / 2 - 1.0) / math.pi) < 1e-14
    assert abs(val - 0.18169011381620932) < 1e-14


def test_sbar_matches_quadrature():
    for y in Y_GRID:
        for a in A_GRID:
            assert abs(sbar_infinity(a, y) - sbar_by_quadrature(a, y)) < 1e-10


def test_sbar_strictly_decreasing():
    for y in (0.3, 0.75, 1.0):
        grid = np.linspace(0.0, math.pi, 80)
        vals = [sbar_infinity(float(a), y) for a in grid]
        assert all(b < a for a, b in zip(vals, vals[1:]))


def test_rate_matches_quadrature():
    for rho in (0.5, 10.0):
        for y in Y_GRID:
            for a in A_GRID:
                closed = info_rate_infinity(a, y, rho)
                quad = rate_by_quadrature(a, y, rho)
                assert abs(closed - quad) < 1e-9, (y, a, rho)


def test_rate_all_beams_on_is_equal_power_case():
    # a = 0 reduces to the equal-power (receiver-only CSI) rate
    for y in (0.5, 1.0):
        for rho in (0.3, 10.0):
            assert abs(info_rate_infinity(0.0, y, rho)
                       - rate_by_quadrature(0.0, y, rho)) < 1e-9
            assert abs(info_rate_equal_power(y, rho)
                       - info_rate_infinity(0.0, y, rho)) < 1e-12


def test_rate_degenerate_threshold():
    with pytest.raises(DegenerateInputError):
        info_rate_infinity(math.pi, 1.0, 10.0)


def test_derivative_matches_quadrature_form():
    for y in Y_GRID:
        for a in A_GRID:
            closed = dinfo_da(a, y, 10.0)
            quad = deriv_by_quadrature(a, y, 10.0)
            assert abs(closed - quad) < 1e-9, (y, a)


def test_derivative_matches_finite_differences():
    h = 1e-5
    for y in (0.5, 1.0):
        for a in (0.5, 1.5, 2.5):
            for rho in (0.5, 5.0, 50.0):
                fd = (info_rate_infinity(a + h, y, rho)
                      - info_rate_infinity(a - h, y, rho)) / (2.0 * h)
                closed = dinfo_da(a, y, rho)
                assert abs(closed - fd) <= 1e-5 * abs(fd), (y, a, rho)


def test_derivative_vanishes_at_optimum_and_negative_near_pi():
    for y, rho in ((1.0, 1.0), (0.5, 0.2), (1.0, 30.0)):
        pt = solve_optimal_a(y, rho)
        if pt.a > 0.0:
            assert abs(dinfo_da(pt.a, y, rho)) < 1e-8
        assert dinfo_da(3.1, y, rho) < 0.0


def test_solver_high_and_low_snr_limits():
    a_by_rho = {rho: solve_optimal_a(1.0, rho) for rho in (1.0, 100.0, 1e4)}
    assert a_by_rho[1e4].a < a_by_rho[100.0].a < a_by_rho[1.0].a
    assert a_by_rho[1e4].sbar > 0.99

    low = solve_optimal_a(1.0, 1e-3)
    assert low.a > 2.0
    assert low.sbar < 0.05


def test_solver_beats_grid_scan():
    for y, rho in ((0.5, 1.0), (1.0, 10.0), (0.25, 0.3)):
        pt = solve_optimal_a(y, rho)
        scan = max(info_rate_infinity(float(a), y, rho)
                   for a in np.linspace(0.0, math.pi - 1e-3, 50))
        assert pt.rate >= scan - 1e-9


def test_design_point_power_constraint():
    pt = solve_optimal_a(0.5, 3.0)
    assert abs(pt.pbar_on * pt.sbar - 3.0) < 1e-9
    assert 0.0 <= pt.sbar <= 1.0
    assert pt.rate >= 0.0


def test_sign_structure_single_change():
    rng = np.random.default_rng(17)
    for _ in range(8):
        y = 1.0 if rng.random() < 0.3 else float(rng.uniform(0.2, 1.0))
        rho = float(10 ** rng.uniform(-2, 3))
        grid = np.linspace(1e-4, math.pi - 1e-4, 400)
        signs = np.sign([dinfo_da(float(a), y, rho) for a in grid])
        changes = int(np.sum(signs[:-1] != signs[1:]))
        assert changes <= 1
        if changes == 1:
            assert signs[0] > 0  # the change is + to -


def test_sweep_monotonicity():
    grid = np.logspace(-1, 3, 20)
    for y in (0.5, 1.0):
        pts = sweep_rho(y, grid)
        a_seq = [p.a for p in pts]
        s_seq = [p.sbar for p in pts]
        r_seq = [p.rate for p in pts]
        assert all(b <= a + 1e-9 for a, b in zip(a_seq, a_seq[1:]))
        assert all(b >= a - 1e-9 for a, b in zip(s_seq, s_seq[1:]))
        assert all(b > a for a, b in zip(r_seq, r_seq[1:]))


def test_sweep_validates_grid():
    with pytest.raises(ValueError):
        sweep_rho(0.5, [1.0, 0.5])
    with pytest.raises(ValueError):
        sweep_rho(0.5, [-1.0, 2.0])
