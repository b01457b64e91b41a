"""Regularized incomplete beta and the F-distribution tail built on it."""

from __future__ import annotations

import math

_TINY = 1e-300


def _betacf(a: float, b: float, x: float, rtol: float, max_iter: int) -> float:
    # Modified Lentz evaluation of the continued fraction for I_x(a, b).
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < rtol:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, rtol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc requires a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # The continued fraction converges fast for x < (a+1)/(a+b+2); use symmetry otherwise.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x, rtol, max_iter) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x, rtol, max_iter) / b


def f_sf(f_stat: float, dfn: float, dfd: float) -> float:
    """Upper tail P(F > f_stat) of the F(dfn, dfd) distribution."""
    if math.isnan(f_stat):
        return math.nan
    if f_stat <= 0:
        return 1.0
    if math.isinf(f_stat):
        return 0.0
    # P(F > f) = I_{d2/(d2 + d1 f)}(d2/2, d1/2)
    z = dfd / (dfd + dfn * f_stat)
    return min(1.0, max(0.0, betainc(dfd / 2.0, dfn / 2.0, z)))


def f_cdf(f_stat: float, dfn: float, dfd: float) -> float:
    return 1.0 - f_sf(f_stat, dfn, dfd)
