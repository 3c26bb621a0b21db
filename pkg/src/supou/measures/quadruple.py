"""Generating quadruple, indices and the gamma integrability condition."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .._numeric import DomainError
from ..extended import INF, Extended
from .levy import JumpPart, LevyFamily, Scaled, Sum, ZERO, DyadicExotic as DyadicJumps
from .mixing import InvalidMeasure, MixingMeasure

CENTERING_MODES = ("paper", "none")


@dataclass(frozen=True)
class GeneratingQuadruple:
    """(a, b, lambda, pi).

    With ``centering="paper"`` the drift is fixed by convention: a equals
    int_{|z|<=1} z lambda(dz) when that integral converges absolutely and 0
    otherwise, and the argument ``a`` is ignored. With ``centering="none"``
    the given ``a`` is used as is.
    """

    lam: LevyFamily
    pi: MixingMeasure
    a: float = 0.0
    b: float = 0.0
    centering: str = "paper"
    check: bool = True

    def __post_init__(self) -> None:
        if self.centering not in CENTERING_MODES:
            raise InvalidMeasure(f"centering must be one of {CENTERING_MODES}")
        if not (self.b >= 0 and math.isfinite(self.b)):
            raise InvalidMeasure("Gaussian variance b must be finite and >= 0")
        if not math.isfinite(self.a):
            raise InvalidMeasure("drift a must be finite")
        if self.check:
            problems = self.validity_problems()
            if problems:
                raise InvalidMeasure("; ".join(problems))

    def validity_problems(self) -> list[str]:
        out = []
        if math.isinf(self.pi.moment(-1.0)):
            out.append("m_-1(pi) = int x^-1 pi(dx) is infinite")
        if not self.lam.is_levy_measure():
            out.append("lambda is not a Levy measure: int (z^2 ^ 1) lambda(dz) = inf")
        if not self.lam.log_moment_finite():
            out.append("int_{|z|>1} log|z| lambda(dz) is infinite")
        return out

    @property
    def valid(self) -> bool:
        return not self.validity_problems()

    @property
    def finite_variation(self) -> bool:
        """int_{|z|<=1} |z| lambda(dz) < inf."""
        return math.isfinite(self.lam.abs_moment(1.0, 0.0, 1.0))

    @property
    def drift(self) -> float:
        if self.centering == "none":
            return self.a
        if self.finite_variation:
            return self.lam.signed_first_moment(0.0, 1.0)
        return 0.0

    @property
    def m_minus1(self) -> float:
        return self.pi.moment(-1.0)


@dataclass(frozen=True)
class IndexTriple:
    """alpha_0, beta_0, eta_inf with flags telling whether each is attained.

    ``alpha``, ``beta`` and ``eta`` are the raw indices. When an index is not
    attained the working value must be taken strictly inside (beta > beta_0,
    alpha < alpha_0, eta < eta_inf); see :meth:`working`.
    """

    alpha: float
    alpha_achieved: bool
    beta: float
    beta_achieved: bool
    eta: float
    eta_achieved: bool
    finite_variation: bool | None = None

    def working(self, offset: float = 0.01) -> "IndexTriple":
        """Move non-attained indices ``offset`` inside their admissible range."""
        alpha = self.alpha
        if not self.alpha_achieved and math.isfinite(alpha):
            alpha = max(alpha - offset, 0.0)
        beta = self.beta if self.beta_achieved else min(self.beta + offset, 2.0)
        eta = self.eta
        if not self.eta_achieved and math.isfinite(eta):
            eta = max(eta - offset, 0.0)
        return IndexTriple(alpha, True, beta, True, eta, True, self.finite_variation)


def compute_indices(q: GeneratingQuadruple) -> IndexTriple:
    return IndexTriple(
        alpha=q.pi.alpha0,
        alpha_achieved=q.pi.alpha_achieved,
        beta=q.lam.beta0,
        beta_achieved=q.lam.beta_achieved,
        eta=q.lam.eta_inf,
        eta_achieved=q.lam.eta_achieved,
        finite_variation=q.finite_variation,
    )


def truncated_moment(
    measure: Union[MixingMeasure, JumpPart, LevyFamily],
    p: float,
    region: tuple[float, float] = (0.0, math.inf),
) -> Extended:
    """int_region x^p Q(dx); for a Levy measure the integrand is |z|^p."""
    lo, hi = region
    if not (lo >= 0 and hi > lo):
        raise DomainError(f"invalid region ({lo}, {hi}]")
    if isinstance(measure, LevyFamily):
        v = measure.abs_moment(p, lo, hi)
    else:
        v = measure.moment(p, lo, hi)
    return Extended.from_float(v)


def _elementary_parts(part: JumpPart) -> list[JumpPart]:
    """Flatten sums; J1 is additive over summands."""
    if isinstance(part, Sum):
        return [q for p in part.parts for q in _elementary_parts(p)]
    return [part]


def _j1_part_finite(pi: MixingMeasure, part: JumpPart, gamma: float) -> bool:
    """Finiteness of int_(0,1] x^-gamma int_(x,1] z^gamma part(dz) pi(dx)."""
    if pi.moment(0.0, 0.0, 1.0) == 0.0 or part.moment(0.0, 0.0, 1.0) == 0.0:
        return True
    p = pi.zero_power
    if math.isinf(p):
        return True
    if isinstance(part, DyadicJumps) and pi.dyadic_a is not None:
        # aligned staircases: z must sit at least one dyadic level above x
        b = part.b
        if gamma < b:
            return gamma < 2.0 * p - b
        return gamma < p
    return gamma < p and part.beta0 < p


def _j1_finite(pi: MixingMeasure, lam: LevyFamily, gamma: float) -> bool:
    return all(
        _j1_part_finite(pi, e, gamma) for side in lam.parts for e in _elementary_parts(side)
    )


@dataclass(frozen=True)
class GammaSplit:
    j1: Extended
    j2: Extended
    j3: Extended

    @property
    def total(self) -> Extended:
        terms = (self.j1, self.j2, self.j3)
        if any(t.is_infinite for t in terms):
            return INF
        return Extended.finite(
            sum(t.value for t in terms), sum(t.abs_error or 0.0 for t in terms)
        )


def _j1_integrand(lam: LevyFamily, gamma: float, x: float) -> float:
    """x^-gamma int_(x, 1] |z|^gamma lambda(dz), evaluated in the log domain.

    Where x^-gamma or the truncated moment would overflow (x below about
    1e-170) the integrand is dropped. J1 is only integrated when it is known to be finite, in which
    case that region contributes far below the quadrature tolerance.
    """
    if x >= 1.0:
        return 0.0
    try:
        m = lam.abs_moment(gamma, x, 1.0)
    except OverflowError:
        return 0.0
    if m == 0.0:
        return 0.0
    expo = math.log(m) - gamma * math.log(x)
    if expo > 700.0:
        return 0.0
    return math.exp(expo)


def gamma_split(q: GeneratingQuadruple, gamma: float, restrict_large: bool = False) -> GammaSplit:
    """The three pieces of int int (|z|/x)^gamma 1(|z| > x [, |z| > 1]) pi(dx) lambda(dz).

    J1 covers x <= 1 with |z| in (x, 1], J2 covers x <= 1 with |z| > 1, and J3
    covers x > 1. Divergence is decided from the family parameters; finite
    pieces are evaluated by quadrature against pi.
    """
    if not gamma > 0:
        raise DomainError("gamma must be > 0")
    pi, lam = q.pi, q.lam

    if restrict_large:
        j1 = Extended.finite(0.0, 0.0)
    elif not _j1_finite(pi, lam, gamma):
        j1 = INF
    else:
        v, e = pi.integrate(lambda x: _j1_integrand(lam, gamma, x), 0.0, 1.0)
        j1 = Extended.finite(v, e)

    small_pi = pi.moment(-gamma, 0.0, 1.0) if pi.moment(0.0, 0.0, 1.0) > 0 else 0.0
    big_lam = lam.abs_moment(gamma, 1.0, math.inf) if lam.tail(1.0) > 0 else 0.0
    if small_pi == 0.0 or big_lam == 0.0:
        j2 = Extended.finite(0.0, 0.0)
    elif math.isinf(small_pi) or math.isinf(big_lam):
        j2 = INF
    else:
        j2 = Extended.finite(small_pi * big_lam, 0.0)

    if pi.tail(1.0) == 0.0 or lam.tail(1.0) == 0.0:
        j3 = Extended.finite(0.0, 0.0)
    elif math.isinf(big_lam):
        j3 = INF
    else:
        v, e = pi.integrate(
            lambda x: x**-gamma * lam.abs_moment(gamma, x, math.inf), 1.0, math.inf
        )
        j3 = Extended.finite(v, e)
    return GammaSplit(j1, j2, j3)


def gamma_condition(
    q: GeneratingQuadruple, gamma: float, restrict_large: bool = False
) -> Extended:
    return gamma_split(q, gamma, restrict_large).total


def gamma_zero_finite(q: GeneratingQuadruple) -> bool:
    """Finiteness of int pi((0, |z|)) lambda(dz) = int lambda({|z| > x}) pi(dx)."""
    pi = q.pi
    if pi.moment(0.0, 0.0, 1.0) == 0.0:
        return True
    p = pi.zero_power
    if math.isinf(p):
        return True
    for side in q.lam.parts:
        for e in _elementary_parts(side):
            if e.moment(0.0, 0.0, 1.0) == 0.0:
                continue
            if isinstance(e, DyadicJumps) and pi.dyadic_a is not None:
                if not e.b < 2.0 * p:
                    return False
            elif not e.beta0 < p:
                return False
    return True
