"""Bracketed bisection for monotone scalar root finding."""

from __future__ import annotations


def bisect(f, lo: float, hi: float, f_lo: float | None = None, xtol: float = 1e-12,
           max_iter: int = 200) -> float:
    """Root of f in [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.

    Bisection rather than anything faster: every caller has a guaranteed
    sign change but no smoothness bound, and the intervals are cheap.
    """
    if f_lo is None:
        f_lo = f(lo)
    f_hi = f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f={f_lo:g},{f_hi:g}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol:
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
