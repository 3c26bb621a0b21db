"""Quadrature wrappers and special functions shared by the analytic modules."""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate, special

EPSREL = 1e-10
EPSABS = 1e-14

# exp(-745) underflows to zero in double precision.
EXP_UNDERFLOW = 745.0


# Below this the log-scale integrands are treated as zero: kernels such as
# t / x overflow near the smallest doubles, and the region only matters for
# integrands behaving like x^p dx / x with p below about 0.003.
LOG_SCALE_FLOOR = 1e-290
# Symmetric cap on the other end; exp(u) overflows beyond u = 709.
LOG_SCALE_CEILING = 1e290
_LOG_CEILING = math.log(LOG_SCALE_CEILING)


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


def integrate_interval(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    points: Iterable[float] | None = None,
    epsrel: float = EPSREL,
    epsabs: float = EPSABS,
    limit: int = 400,
) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[lo, hi]``.

    ``points`` are interior breakpoints (discontinuities of ``f``). They are
    only honoured on finite intervals, so an infinite upper limit is split at
    the largest breakpoint first.
    """
    if hi <= lo:
        return 0.0, 0.0
    pts = sorted({p for p in (points or ()) if lo < p < hi})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if math.isinf(hi):
            split = pts[-1] if pts else None
            if split is None:
                return integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)[:2]
            v1, e1 = integrate_interval(f, lo, split, pts[:-1], epsrel, epsabs, limit)
            v2, e2 = integrate.quad(f, split, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)[:2]
            return v1 + v2, e1 + e2
        if pts:
            v, e = integrate.quad(
                f, lo, hi, points=pts, epsabs=epsabs, epsrel=epsrel, limit=limit
            )[:2]
            return v, e
        return integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)[:2]


def integrate_log_scale(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    points: Sequence[float] = (),
    epsrel: float = EPSREL,
    epsabs: float = EPSABS,
) -> tuple[float, float]:
    """Integrate ``f(x) dx`` over ``(lo, hi]`` after substituting ``x = e^u``.

    Power-type singularities at ``x = 0`` become exponentially decaying tails,
    which QUADPACK handles far better than the raw endpoint singularity.
    """
    if hi <= lo:
        return 0.0, 0.0
    ulo = -math.inf if lo <= 0.0 else math.log(lo)
    uhi = math.inf if math.isinf(hi) else math.log(hi)

    def g(u: float) -> float:
        if u > _LOG_CEILING:
            return 0.0
        x = math.exp(u)
        if x < LOG_SCALE_FLOOR:
            return 0.0
        return f(x) * x

    upts = [math.log(p) for p in points if lo < p < hi]
    if math.isinf(ulo) and math.isinf(uhi):
        v1, e1 = integrate_interval(g, ulo, 0.0, [p for p in upts if p < 0], epsrel, epsabs)
        v2, e2 = integrate_interval(g, 0.0, uhi, [p for p in upts if p > 0], epsrel, epsabs)
        return v1 + v2, e1 + e2
    if math.isinf(ulo):
        # quad maps (-inf, b] itself; breakpoints need a finite split
        anchor = min(upts + [uhi]) - 1.0
        v1, e1 = integrate_interval(g, ulo, anchor, (), epsrel, epsabs)
        v2, e2 = integrate_interval(g, anchor, uhi, upts, epsrel, epsabs)
        return v1 + v2, e1 + e2
    return integrate_interval(g, ulo, uhi, upts, epsrel, epsabs)


@lru_cache(maxsize=8)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def upper_gamma(s: float, x: float) -> float:
    """Non-regularized upper incomplete gamma Gamma(s, x) for any real ``s``.

    Negative ``s`` uses Gamma(s, x) = (Gamma(s + 1, x) - x^s e^{-x}) / s.
    """
    if x < 0:
        raise DomainError("upper_gamma requires x >= 0")
    if x == 0.0:
        if s <= 0:
            return math.inf
        return math.gamma(s)
    if math.isinf(x):
        return 0.0
    if s > 0:
        return float(special.gammaincc(s, x) * special.gamma(s))
    if s == 0:
        return float(special.exp1(x))
    return (upper_gamma(s + 1.0, x) - x**s * math.exp(-x)) / s


def one_minus_exp(y):
    """1 - e^{-y}, accurate for small ``y``."""
    return -np.expm1(-np.asarray(y, dtype=float))


def relative_one_minus_exp(y):
    """(1 - e^{-y}) / y with the value 1 at y = 0."""
    y = np.asarray(y, dtype=float)
    safe = np.where(y == 0.0, 1.0, y)
    return np.where(y == 0.0, 1.0, -np.expm1(-safe) / safe)


def second_order_remainder(y):
    """y - 1 + e^{-y} without cancellation for small ``y``."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-3
    series = y * y * (0.5 - y * (1.0 / 6.0 - y * (1.0 / 24.0 - y / 120.0)))
    direct = y + np.expm1(-np.where(small, 0.0, y))
    return np.where(small, series, direct)


def ols_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit ``y ~ c + s x``; returns (slope, stderr, intercept)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 3:
        raise ValueError("need at least three points for a slope fit")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - intercept - slope * x
    s2 = float(np.sum(resid**2)) / (n - 2)
    return slope, math.sqrt(s2 / sxx), float(intercept)
