"""Closed-form and quadrature quantities of the integrated process X*(t).

Notation: q = (a, b, lambda, pi) is a :class:`GeneratingQuadruple`, m_p is the
p-th moment, and the kernel

    f_t(x, s) = x^-1 (1 - e^{-xt}) e^{xs}        for s <= 0,
              = x^-1 (1 - e^{-x(t - s)})         for 0 < s <= t,
              = 0                                for s > t,

gives the weight of a Poisson point (x, s, z) in X*(t) = sum z f_t(x, s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Optional

import numpy as np

from ._numeric import (
    DomainError,
    gauss_legendre,
    integrate_interval,
    integrate_log_scale,
    one_minus_exp,
    second_order_remainder,
)
from .extended import INF, UNDEFINED, Extended
from .measures.levy import JumpPart, _is_zero
from .measures.quadruple import GeneratingQuadruple, IndexTriple, compute_indices


class HypothesisError(ValueError):
    """The hypothesis under which a quantity is defined does not hold."""


class NumericError(ArithmeticError):
    """A numerical procedure failed (e.g. a covariance is not positive definite)."""


# ---------------------------------------------------------------------------
# kernel


def kernel(x, s, t):
    """f_t(x, s), vectorized over numpy-broadcastable arguments."""
    x, s, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, s, t)))
    past = s <= 0.0
    v_past = one_minus_exp(x * t) * np.exp(np.where(past, x * s, 0.0)) / x
    d = np.where(past | (s > t), 0.0, x * (t - s))
    v_fut = one_minus_exp(d) / x
    return np.where(past, v_past, np.where(s <= t, v_fut, 0.0))


def kernel_l2(x, t):
    """int f_t(x, s)^2 ds = x^-2 (t - (1 - e^{-xt}) / x)."""
    x = np.asarray(x, dtype=float)
    y = x * t
    small = np.abs(y) < 1e-3
    # for small y the remainder is y^2 (1/2 - y/6 + ...), so divide by x once
    series = t * t * (0.5 - y * (1.0 / 6.0 - y * (1.0 / 24.0 - y / 120.0))) / np.where(small, x, 1.0)
    direct = second_order_remainder(np.where(small, 1.0, y)) / np.where(small, 1.0, x) ** 3
    return np.where(small, series, direct)


def _check_time(t: float, strict: bool = False) -> None:
    if not (t > 0 if strict else t >= 0) or not math.isfinite(t):
        raise DomainError(f"time must be {'> 0' if strict else '>= 0'} and finite, got {t}")


# ---------------------------------------------------------------------------
# moments of X*(t)


def mean_integrated(q: GeneratingQuadruple, t: float) -> Extended:
    """E X*(t) = t m_-1(pi) (a + int_{|z|>1} z lambda(dz)).

    Under the paper centering with finite-variation lambda this equals
    t m_-1(pi) int z lambda(dz). A divergent positive large-jump mean gives
    +inf; a divergent negative one (or both) is reported as undefined.
    """
    _check_time(t)
    lam = q.lam
    pos = lam.positive._moment(1.0, 1.0, math.inf) if not _is_zero(lam.positive) else 0.0
    neg = lam.negative._moment(1.0, 1.0, math.inf) if not _is_zero(lam.negative) else 0.0
    if math.isinf(neg):
        return UNDEFINED
    if math.isinf(pos):
        return INF if t > 0 else Extended.finite(0.0, 0.0)
    return Extended.finite(t * q.m_minus1 * (q.drift + pos - neg), 0.0)


def _l2_pi_integral(q: GeneratingQuadruple, t: float) -> tuple[float, float]:
    """int int f_t^2 pi(dx) ds = int (xt - 1 + e^{-xt}) x^-3 pi(dx)."""
    if t == 0:
        return 0.0, 0.0
    return q.pi.integrate(lambda x: float(kernel_l2(x, t)))


def variance_integrated(q: GeneratingQuadruple, t: float) -> Extended:
    """Var X*(t) = (b + m_2(|lambda|)) int int f_t^2 pi(dx) ds."""
    _check_time(t)
    m2 = q.lam.abs_moment(2.0) if not q.lam.is_zero else 0.0
    if math.isinf(m2):
        return INF
    v, e = _l2_pi_integral(q, t)
    c = q.b + m2
    return Extended.finite(c * v, c * e)


def gaussian_variance(q: GeneratingQuadruple, t: float) -> float:
    """Var of the Gaussian component at time t, i.e. 2 Q(t)."""
    _check_time(t)
    if q.b == 0 or t == 0:
        return 0.0
    return q.b * _l2_pi_integral(q, t)[0]


# ---------------------------------------------------------------------------
# Levy tail of X*(t)


def _one_sided(q: GeneratingQuadruple, side: str) -> JumpPart:
    if side == "positive":
        return q.lam.positive
    if side == "negative":
        return q.lam.negative
    raise DomainError("side must be 'positive' or 'negative'")


def _tail_inner(part: JumpPart, x: float, t: float, r: float) -> tuple[float, float]:
    """int_{z0}^inf tail(z) / (z - xr) dz with z0 = xr / (1 - e^{-xt}).

    Substituting u = xr / z gives int_0^U tail(xr/u) / (u (1 - u)) du with
    U = 1 - e^{-xt}. The part u <= 1/2 is integrated on a log scale in u; the
    part u > 1/2 uses w = -log(1 - u), which removes the 1/(1 - u) peak.
    """
    xr = x * r
    big_u = float(one_minus_exp(x * t))
    if big_u <= 0.0 or part.tail(xr / big_u) == 0.0:
        return 0.0, 0.0
    u_pts = [xr / z for z in part.breakpoints() if z > 0 and xr / z < big_u]
    split = min(big_u, 0.5)
    f1 = lambda u: part.tail(xr / u) / (u * (1.0 - u))
    v, e = integrate_log_scale(f1, 0.0, split, points=[p for p in u_pts if p < split])
    if big_u > 0.5:
        w_hi = x * t
        w_pts = [-math.log1p(-p) for p in u_pts if p > 0.5]

        def f2(w: float) -> float:
            u = -math.expm1(-w)
            return part.tail(xr / u) / u

        v2, e2 = integrate_interval(f2, math.log(2.0), w_hi, points=w_pts)
        v += v2
        e += e2
    return v, e


def levy_tail_integrated_with_error(
    q: GeneratingQuadruple, t: float, r: float, side: str = "positive"
) -> tuple[float, float]:
    """eta*_t(r) and an absolute error estimate for one sign of lambda."""
    if not (t > 0 and r > 0):
        raise DomainError("levy_tail_integrated requires t > 0 and r > 0")
    part = _one_sided(q, side)
    if _is_zero(part):
        return 0.0, 0.0
    # worst relative error of the inner integrals bounds their share of the total
    rel = [0.0]

    def g(x: float) -> float:
        v, e = _tail_inner(part, x, t, r)
        if v > 0:
            rel[0] = max(rel[0], e / v)
        return v / x

    v, e = q.pi.integrate(g)
    return v, e + rel[0] * abs(v)


def levy_tail_integrated(q: GeneratingQuadruple, t: float, r: float, side: str = "positive") -> float:
    """eta*_t(r) = int x^-1 pi(dx) int_{z0}^inf tail(z) / (z - xr) dz."""
    return levy_tail_integrated_with_error(q, t, r, side)[0]


# ---------------------------------------------------------------------------
# moment and exponential-moment criteria


@dataclass(frozen=True)
class MomentVerdict:
    """``status`` is ``finite``, ``infinite`` or ``finite_if`` (then ``value`` holds the integral)."""

    status: str
    reason: str
    value: Optional[Extended] = None

    @property
    def is_finite(self) -> bool:
        return self.status == "finite" or (
            self.status == "finite_if" and self.value is not None and self.value.is_finite
        )


def moment_finite(q: GeneratingQuadruple, beta: float) -> MomentVerdict:
    """Decide E|X*(t)|^beta < inf."""
    if not beta > 0:
        raise DomainError("beta must be > 0")
    big = q.lam.abs_moment(beta, 1.0, math.inf) if not q.lam.is_zero else 0.0
    if math.isinf(big):
        return MomentVerdict("infinite", "int_{|z|>1} |z|^beta lambda(dz) = inf")
    if beta >= 1:
        return MomentVerdict("finite", "beta >= 1 and the large-jump beta-moment is finite")
    if math.isfinite(q.pi.moment(-beta)):
        return MomentVerdict("finite", "beta < 1 and m_-beta(pi) < inf")

    # int_x^inf tail(z) z^(beta-1) dz = (m_beta(lambda | > x) - x^beta tail(x)) / beta
    def g(x: float) -> float:
        inner = q.lam.abs_moment(beta, x, math.inf) - x**beta * q.lam.tail(x)
        return x ** (-beta) * inner / beta

    v, e = q.pi.integrate(g, 1.0, math.inf)
    return MomentVerdict(
        "finite_if",
        "int_(1,inf) x^-beta pi(dx) int_x^inf tail(z) z^(beta-1) dz",
        Extended.from_float(v, e),
    )


def k0(q: GeneratingQuadruple, t: float) -> float:
    """K_0(t) = (1 - e^{-eps0 t}) / eps0 with eps0 = inf supp pi (t when eps0 = 0)."""
    eps0 = q.pi.support_min
    if eps0 == 0:
        return t
    return float(one_minus_exp(eps0 * t)) / eps0


def exp_moment(q: GeneratingQuadruple, t: float, s: float) -> str:
    """Finiteness of E e^{s X*(t)}: ``finite``, ``infinite`` or ``boundary``.

    Only positive jumps matter for s > 0. The criterion compares s K_0(t)
    with the exponential radius of the positive part; exact equality is
    ``finite`` when the family is integrable at its radius and ``boundary``
    otherwise.
    """
    _check_time(t, strict=True)
    if not s > 0:
        raise DomainError("s must be > 0")
    part = q.lam.positive
    if _is_zero(part) or part.tail(1.0) == 0.0:
        return "finite"
    c = s * k0(q, t)
    radius = part.exp_radius
    if math.isclose(c, radius, rel_tol=1e-12, abs_tol=0.0):
        return "finite" if part.exp_finite_at_radius else "boundary"
    return "finite" if c < radius else "infinite"


# ---------------------------------------------------------------------------
# tail asymptotics


def _scaled_inner(x: float, t: float, gamma: float) -> float:
    """x^-gamma int_0^{U} y^(gamma-1) / (1 - y) dy with U = 1 - e^{-xt}.

    Uses y = U w^(1/gamma): the result is (U/x)^gamma / gamma times
    int_0^1 dw / (1 - U w^(1/gamma)), evaluated without cancellation.
    """
    big_u = float(one_minus_exp(x * t))
    tail_u = math.exp(-x * t)

    def h(w: float) -> float:
        if w == 0.0:
            return 1.0
        denom = tail_u + big_u * -math.expm1(math.log(w) / gamma)
        return 1.0 / denom

    v, _ = integrate_interval(h, 0.0, 1.0)
    return (big_u / x) ** gamma / gamma * v


def tail_asymptote_constant(q: GeneratingQuadruple, t: float, gamma: float) -> float:
    """C(t, gamma) with eta*_t(r) ~ tail(r) C(t, gamma) as r -> inf."""
    _check_time(t, strict=True)
    if not gamma > 0:
        raise DomainError("gamma must be > 0")
    part = q.lam.positive
    idx = None if _is_zero(part) else part.tail_rv_index()
    if idx is None or not math.isclose(idx, gamma, rel_tol=1e-12):
        raise HypothesisError(
            f"hypothesis not satisfied: the positive jump tail is not regularly varying with index -{gamma}"
        )
    alpha0 = q.pi.alpha0
    if not (alpha0 > 0 and gamma < 1.0 + 2.0 * alpha0):
        raise HypothesisError(
            "hypothesis not satisfied: no eps > 0 with int x^(-1-eps) pi(dx) + int x^(eps-gamma) pi(dx) < inf"
        )
    v, _ = q.pi.integrate(lambda x: _scaled_inner(x, t, gamma) / x)
    return v


# ---------------------------------------------------------------------------
# growth exponents and limit classes

CASE_TAGS = ("half", "inv_eta", "inv_one_plus_alpha", "one_minus_alpha_over_beta")


@dataclass(frozen=True)
class GrowthVerdict:
    """Upper bound on limsup log|X*(t) - center| / log t.

    ``exponent_bound`` is a :class:`fractions.Fraction` when the indices were
    given as rationals and a float otherwise. ``covered`` is False for the
    index combination outside the four table rows, where the larger of the
    two neighbouring formulas is returned.
    """

    exponent_bound: Real
    case_tag: str
    log_correction: bool
    covered: bool = True
    row: int = 0

    def __float__(self) -> float:
        return float(self.exponent_bound)


def _rational(v):
    """Keep exact arithmetic for int/Fraction inputs; infinities stay float."""
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return Fraction(v)
    return v


def growth_exponent(indices: IndexTriple) -> GrowthVerdict:
    """Four-case growth bound from (alpha, eta, beta).

    The log factor applies when the governing result is the infinite
    variation bound t^{1/gamma} log t, i.e. infinite-variation lambda in rows
    one to three. When ``finite_variation`` is unknown it is inferred from
    beta > 1.
    """
    a, b, e = (_rational(v) for v in (indices.alpha, indices.beta, indices.eta))
    fv = indices.finite_variation
    if fv is None:
        fv = not b > 1
    if a >= 1:
        if e >= 2:
            bound, tag, row = Fraction(1, 2) if isinstance(a, Fraction) else 0.5, "half", 1
        else:
            bound, tag, row = 1 / e, "inv_eta", 2
    elif b <= 1 + a:
        if e <= 1 + a:
            bound, tag, row = 1 / e, "inv_eta", 2
        else:
            bound, tag, row = 1 / (1 + a), "inv_one_plus_alpha", 3
    elif e > 1 + a:
        bound, tag, row = 1 - a / b, "one_minus_alpha_over_beta", 4
    else:
        # eta <= 1 + alpha < beta lies outside the table; take the weaker bound
        if 1 / e >= 1 - a / b:
            return GrowthVerdict(1 / e, "inv_eta", not fv, covered=False)
        return GrowthVerdict(1 - a / b, "one_minus_alpha_over_beta", False, covered=False)
    return GrowthVerdict(bound, tag, (not fv) and row != 4, covered=True, row=row)


@dataclass(frozen=True)
class LimitClass:
    name: str
    hurst: Optional[float]
    reason: str = ""


def limit_class(q: GeneratingQuadruple) -> LimitClass:
    """Weak-limit class of the normalized integrated process.

    Requires pi to have a density regularly varying at 0 (``rv_density``)
    and finite variance; otherwise ``unclassified``.
    """
    rv = q.pi.rv_density()
    if rv is None:
        return LimitClass("unclassified", None, "pi has no regularly varying density at 0")
    var = variance_integrated(q, 1.0)
    if not var.is_finite:
        return LimitClass("unclassified", None, "infinite variance")
    a0 = q.pi.alpha0
    if a0 > 1:
        return LimitClass("BrownianMotion", 0.5)
    if 0 < a0 < 1:
        if q.b > 0:
            return LimitClass("FractionalBM", 1.0 - a0 / 2.0)
        if q.lam.is_zero:
            return LimitClass("unclassified", None, "zero process")
        if math.isfinite(q.lam.abs_moment(1.0 + a0, 0.0, 1.0)):
            return LimitClass("StableLevy", 1.0 / (1.0 + a0))
        rvs = [p.small_rv() for p in q.lam.parts]
        beta0 = q.lam.beta0
        if all(r is not None for r in rvs) and 1.0 + a0 < beta0 < 2.0:
            return LimitClass("StableDependent", 1.0 - a0 / beta0)
    return LimitClass("unclassified", None, "no case hypotheses hold")


# ---------------------------------------------------------------------------
# Gaussian part: envelope and covariance


def lil_envelope(q: GeneratingQuadruple, t: float) -> float:
    """Almost-sure envelope of the Gaussian integrated process at time t > e.

    If m_-2(pi) < inf: sqrt(2 Var X*(t) log log t). If pi has a density
    ~ alpha ell x^alpha at 0 with alpha in (0, 1): the regularly varying
    envelope sigma ell^(1/2) t^(1 - alpha/2) sqrt(2 log log t).
    """
    if not t > math.e:
        raise DomainError("the envelope needs t > e")
    if not q.b > 0:
        raise HypothesisError("hypothesis not satisfied: b > 0 is required")
    lll = math.log(math.log(t))
    if math.isfinite(q.pi.moment(-2.0)):
        return math.sqrt(2.0 * gaussian_variance(q, t) * lll)
    rv = q.pi.rv_density()
    if rv is None or not 0 < rv[0] < 1:
        raise HypothesisError("hypothesis not satisfied: m_-2(pi) = inf without a regularly varying density")
    alpha, ell = rv
    sigma2 = q.b * math.gamma(1.0 + alpha) / ((2.0 - alpha) * (1.0 - alpha))
    return math.sqrt(sigma2 * ell) * t ** (1.0 - alpha / 2.0) * math.sqrt(2.0 * lll)


def _cov_kernel(x: float, a: float, b: float) -> float:
    """int f_a(x, s) f_b(x, s) ds."""
    m = min(a, b)
    # (1 - e^{-xa}) / x stays near a for tiny x, so divide before multiplying
    past = (-math.expm1(-x * a) / x) * (-math.expm1(-x * b) / x) / (2.0 * x)
    if x * m < 0.5:
        nodes, weights = gauss_legendre(32)
        s = nodes * m
        vals = (one_minus_exp(x * (a - s)) / x) * (one_minus_exp(x * (b - s)) / x)
        fut = m * float(np.dot(weights, vals))
    else:
        ea, eb = math.exp(-x * a), math.exp(-x * b)
        fut = (
            m
            - (math.exp(-x * (a - m)) - ea) / x
            - (math.exp(-x * (b - m)) - eb) / x
            + math.exp(-x * (a + b - 2.0 * m)) * -math.expm1(-2.0 * x * m) / (2.0 * x)
        ) / x**2
    return past + fut


def gaussian_covariance(q: GeneratingQuadruple, times) -> np.ndarray:
    """Cov(X_G*(t_i), X_G*(t_j)) = b int int f_{t_i} f_{t_j} pi(dx) ds."""
    times = np.asarray(times, dtype=float)
    n = times.size
    cov = np.zeros((n, n))
    if q.b == 0:
        return cov
    for i in range(n):
        for j in range(i, n):
            ti, tj = float(times[i]), float(times[j])
            v, _ = q.pi.integrate(lambda x: _cov_kernel(x, ti, tj))
            cov[i, j] = cov[j, i] = q.b * v
    return cov


def factorize_covariance(cov: np.ndarray, jitter: float = 1e-12) -> np.ndarray:
    """Matrix L with L L^T = cov (up to jitter on the diagonal)."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    scale = float(np.max(np.diag(cov))) if cov.size else 1.0
    try:
        return np.linalg.cholesky(cov + jitter * scale * np.eye(cov.shape[0]))
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh(cov)
    if w.min() < -jitter * scale:
        cond = abs(w.max() / w.min()) if w.min() != 0 else math.inf
        raise NumericError(
            f"covariance is not positive semidefinite: min eigenvalue {w.min():.3e}, "
            f"max {w.max():.3e}, condition {cond:.3e}"
        )
    return v * np.sqrt(np.clip(w, 0.0, None))


def indices_of(q: GeneratingQuadruple) -> IndexTriple:
    return compute_indices(q)
