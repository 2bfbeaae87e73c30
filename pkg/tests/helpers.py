"""Shared independent oracles for the test suite.

Everything here deliberately avoids the closed-form code paths it is used
to check: rates and powers come from adaptive quadrature of the defining
integrals, and the double series from full-matrix truncated summation.
"""

import cmath
import math

import numpy as np

from beamcap.spectra import integrate, t_density_from_ratio


def sbar_by_quadrature(a, y, tol=1e-12):
    return integrate(lambda t: t_density_from_ratio(t, y), a, math.pi, tol=tol)


def rate_by_quadrature(a, y, rho, tol=1e-12):
    sbar = sbar_by_quadrature(a, y)

    def integrand(t):
        lam = 1.0 + y - 2.0 * math.sqrt(y) * np.cos(t)
        return np.log1p(rho / (sbar * y) * lam) * t_density_from_ratio(t, y)

    return integrate(integrand, a, math.pi, tol=tol)


def deriv_by_quadrature(a, y, rho, tol=1e-13):
    sbar = sbar_by_quadrature(a, y)
    alpha = sbar * y / rho

    def integrand(t):
        lam = 1.0 + y - 2.0 * math.sqrt(y) * np.cos(t)
        return t_density_from_ratio(t, y) / (alpha + lam)

    i_d = integrate(integrand, a, math.pi, tol=tol)
    f_t = t_density_from_ratio(a, y)
    z_a = (1.0 + y - 2.0 * math.sqrt(y) * math.cos(a)) / alpha
    return f_t * (1.0 - math.log1p(z_a) - (y / rho) * i_d)


def waterfill_power_by_quadrature(nu, a, y, tol=1e-12):
    def integrand(t):
        lam = 1.0 + y - 2.0 * math.sqrt(y) * np.cos(t)
        return (nu - y / lam) * t_density_from_ratio(t, y)

    return integrate(integrand, a, math.pi, tol=tol)


def waterfill_capacity_by_quadrature(nu, a, y, tol=1e-12):
    def integrand(t):
        lam = 1.0 + y - 2.0 * math.sqrt(y) * np.cos(t)
        return np.log(nu / y * lam) * t_density_from_ratio(t, y)

    return integrate(integrand, a, math.pi, tol=tol)


def sr1_brute(u, r, t, terms=2000):
    """Truncated double sum evaluated as a full matrix; the r^(-2l) factor
    is folded into the power of r**2 to stay in floating range."""
    ll = np.arange(1, terms + 1)
    kk = np.arange(1, terms + 1)
    p = u / r
    head_terms = p ** kk / kk
    head = np.concatenate([[0.0], np.cumsum(head_terms)])[:terms]  # sum_{k<l}
    offs = kk[None, :] - ll[:, None]
    tail_matrix = np.where(offs >= 0,
                           p ** kk[None, :] * (r * r) ** np.maximum(offs, 0) / kk[None, :],
                           0.0)
    tail = tail_matrix.sum(axis=1)
    outer = (r * cmath.exp(1j * t)) ** ll / ll
    return complex(np.sum(outer * (head + tail)))


def sr2_brute(r, t, terms=2000):
    ll = np.arange(1, terms + 1)
    kk = np.arange(1, terms + 1)
    offs = kk[None, :] - ll[:, None]
    tail_matrix = np.where(offs >= 0, (r * r) ** np.maximum(offs, 0) / kk[None, :], 0.0)
    tail = tail_matrix.sum(axis=1)
    outer = (r * cmath.exp(1j * t)) ** ll / ll
    return complex(np.sum(outer * tail))
