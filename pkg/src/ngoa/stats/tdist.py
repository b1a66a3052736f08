"""Student t distribution from the regularized incomplete beta function.

The incomplete beta is evaluated with the modified Lentz continued fraction;
quantiles are found by safeguarded Newton iteration on the CDF.
"""
from __future__ import annotations

import math
from statistics import NormalDist

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
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
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def t_sf_abs(t: float, df: float) -> float:
    """P(T > |t|)."""
    return 0.5 * betainc(0.5 * df, 0.5, df / (df + t * t))


def t_central(t: float, df: float) -> float:
    """P(0 < T < |t|), accurate for small |t|."""
    t2 = t * t
    return 0.5 * betainc(0.5, 0.5 * df, t2 / (df + t2))


def t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError(f"degrees of freedom must be > 0, got {df}")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = t_sf_abs(t, df)
    if tail < 0.25:
        return 1.0 - tail if t > 0 else tail
    c = t_central(t, df)
    return 0.5 + c if t > 0 else 0.5 - c


def t_pdf(t: float, df: float) -> float:
    return math.exp(math.lgamma(0.5 * (df + 1)) - math.lgamma(0.5 * df)
                    - 0.5 * math.log(df * math.pi)
                    - 0.5 * (df + 1) * math.log1p(t * t / df))


def t_ppf(p: float, df: float) -> float:
    """Quantile of Student t with `df` degrees of freedom."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if df <= 0:
        raise ValueError(f"degrees of freedom must be > 0, got {df}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_ppf(1.0 - p, df)
    # upper half; match the tail for p near 1 and the central mass near 0.5
    use_tail = p > 0.75
    target = 1.0 - p if use_tail else p - 0.5

    def f(x: float) -> float:
        if use_tail:
            return t_sf_abs(x, df) - target
        return target - t_central(x, df)

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        lo, hi = hi, hi * 2.0
        if hi > 1e300:
            return math.inf
    x = min(max(NormalDist().inv_cdf(p), lo), hi)
    for _ in range(200):
        fx = f(x)
        if fx > 0:
            lo = x
        else:
            hi = x
        nx = x + fx / t_pdf(x, df)
        if not lo < nx < hi:
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= 1e-15 * max(1e-300, abs(nx)):
            return nx
        x = nx
    return x
