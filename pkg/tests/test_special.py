import cmath
import math

import mpmath
import numpy as np
import pytest

from beamcap.errors import DegenerateInputError, DomainError
from beamcap.special import AuxQuantities, aux_quantities, dilog, split_roots, sr1, sr2
from helpers import sr1_brute, sr2_brute

mpmath.mp.dps = 30


def test_dilog_fixed_points():
    assert dilog(0.0) == 0.0
    assert abs(dilog(1.0) - math.pi ** 2 / 6.0) < 1e-13
    assert abs(dilog(-1.0) + math.pi ** 2 / 12.0) < 1e-13


def test_dilog_reflection_identity():
    z = 0.3
    lhs = dilog(z) + dilog(1.0 - z)
    rhs = math.pi ** 2 / 6.0 - math.log(z) * math.log(1.0 - z)
    assert abs(lhs - rhs) < 1e-10


def test_dilog_against_mpmath_on_disk():
    rng = np.random.default_rng(0)
    points = [0.5, -0.5, 0.99, 1j, -1j, cmath.exp(1j * math.pi / 3),
              cmath.exp(2.9j), cmath.exp(0.05j), 1.0 - 1e-13]
    points += [float(rng.uniform(0, 1)) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
               for _ in range(60)]
    points += [cmath.exp(1j * th) for th in np.linspace(-math.pi, math.pi, 25)]
    for z in points:
        ref = complex(mpmath.polylog(2, mpmath.mpc(z)))
        assert abs(dilog(z) - ref) < 1e-13, z


def test_dilog_domain_error():
    with pytest.raises(DomainError):
        dilog(1.5)
    with pytest.raises(DomainError):
        dilog(1.1j)


def test_sr1_zero_and_symmetry():
    assert sr1(0.0, 0.7, 1.3) == 0.0
    for (u, r, t) in ((0.3, 0.7, 1.0), (0.55, 0.8, 2.6), (0.1, 0.5, 0.2)):
        assert abs(sr1(u, r, -t) - sr1(u, r, t).conjugate()) < 1e-14


def test_sr1_frozen_value():
    # frozen from the full-matrix truncated double sum (terms <= 2000)
    expected = 0.06041762100678302 + 0.3728216356047776j
    assert abs(sr1(0.3, 0.7, 1.0) - expected) < 1e-11


def test_sr1_against_brute_force():
    rng = np.random.default_rng(42)
    for _ in range(6):
        r = float(rng.uniform(0.3, 0.9))
        u = float(r * rng.uniform(0.1, 0.95))
        t = float(rng.uniform(-math.pi, math.pi))
        assert abs(sr1(u, r, t) - sr1_brute(u, r, t)) < 1e-11


def test_sr1_domain_errors():
    with pytest.raises(DomainError):
        sr1(0.5, 1.0, 0.3)
    with pytest.raises(DomainError):
        sr1(0.8, 0.5, 0.3)  # u/r > 1
    with pytest.raises(DomainError):
        sr1(1.2, 0.5, 0.3)


def test_sr2_symmetry_and_frozen_value():
    assert abs(sr2(0.5, -0.7) - sr2(0.5, 0.7).conjugate()) < 1e-14
    expected = 0.6752463564648719 + 0.0j  # frozen from the brute-force sum
    assert abs(sr2(0.5, 0.0) - expected) < 1e-11


def test_sr2_against_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(6):
        r = float(rng.uniform(0.2, 0.9))
        t = float(rng.uniform(-math.pi, math.pi))
        assert abs(sr2(r, t) - sr2_brute(r, t)) < 1e-11


def test_sr2_small_modulus_leading_order():
    # leading term is the l=1, k=1 one: r * e^{it}, so the series is O(r)
    val = sr2(1e-4, 1.0)
    assert 0.5e-4 < abs(val) < 2e-4
    assert abs(val - 1e-4 * cmath.exp(1j)) < 1e-8


def test_sr2_domain_error():
    with pytest.raises(DomainError):
        sr2(1.0, 0.5)


def test_series_truncation_stability():
    # the adaptive stop agrees with far longer brute sums, and lengthening
    # the brute sum by 10 terms no longer moves it
    u, r, t = 0.4, 0.8, 1.7
    long_sum = sr1_brute(u, r, t, terms=2400)
    longer = sr1_brute(u, r, t, terms=2410)
    assert abs(long_sum - longer) < 1e-12
    assert abs(sr1(u, r, t) - long_sum) < 1e-11


def test_aux_quantities_hand_values():
    aux = aux_quantities(1.0, 1.0, 1.0, math.pi / 2)
    assert aux.alpha == 1.0
    assert abs(aux.w - 0.5 * (3.0 + math.sqrt(5.0))) < 1e-14
    assert abs(aux.u - 0.5 * (3.0 - math.sqrt(5.0))) < 1e-14
    assert abs(aux.theta_r - math.pi / 4.0) < 1e-14
    assert isinstance(aux, AuxQuantities)


@pytest.mark.parametrize("t", [0.0, math.pi / 2, math.pi])
def test_aux_factorization_identity(t):
    # w (1 + u^2 - 2u cos t) == 1 + y + alpha - 2 sqrt(y) cos t
    for (y, sbar, rho) in ((0.5, 0.8, 2.0), (1.0, 0.3, 10.0), (0.25, 1.0, 0.7)):
        aux = aux_quantities(y, sbar, rho, 1.0)
        lhs = aux.w * (1.0 + aux.u ** 2 - 2.0 * aux.u * math.cos(t))
        rhs = 1.0 + y + aux.alpha - 2.0 * math.sqrt(y) * math.cos(t)
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_aux_root_inequalities():
    rng = np.random.default_rng(3)
    for _ in range(100):
        y = float(rng.uniform(0.05, 1.0))
        sbar = float(rng.uniform(1e-3, 1.0))
        rho = float(10 ** rng.uniform(-2, 3))
        w, u, r_minus_u = split_roots(y, sbar * y / rho)
        assert 0.0 < u < 1.0
        assert u / math.sqrt(y) < 1.0
        assert r_minus_u > 0.0
        assert w > 0.0
        # stable r - u form agrees with the direct subtraction
        assert abs(r_minus_u - (math.sqrt(y) - u)) < 1e-12 * max(1.0, r_minus_u)


def test_aux_theta_denominator_positive():
    # principal-branch arctangent is safe: 1 - u cos(a) and (for y < 1)
    # 1 - r cos(a) stay strictly positive, so no quadrant correction needed
    rng = np.random.default_rng(4)
    for _ in range(50):
        y = float(rng.uniform(0.1, 0.999))
        a = float(rng.uniform(0, math.pi))
        aux = aux_quantities(y, float(rng.uniform(0.01, 1.0)),
                             float(10 ** rng.uniform(-2, 2)), a)
        assert 1.0 - aux.u * math.cos(a) > 0.0
        assert 1.0 - aux.r * math.cos(a) > 0.0


def test_aux_degenerate_inputs():
    with pytest.raises(DegenerateInputError):
        aux_quantities(0.5, 0.0, 1.0, 0.3)
    with pytest.raises(DegenerateInputError):
        aux_quantities(0.5, 0.5, 0.0, 0.3)
