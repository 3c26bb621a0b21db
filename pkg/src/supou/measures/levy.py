"""Parametric Levy measures.

A signed Levy measure is a pair of one-sided measures on (0, inf), one for
positive and one for negative jump sizes (``|z|`` in both cases). All
one-sided families carry closed-form tails, truncated moments, indices and
inverse-CDF samplers for the restriction to ``|z| > eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Optional, Sequence

import numpy as np
from scipy import special

from .._numeric import DomainError, integrate_interval, upper_gamma
from .mixing import InvalidMeasure, dyadic_points


def _check_region(lo: float, hi: float) -> None:
    if not (lo >= 0.0) or not (hi > lo):
        raise DomainError(f"invalid region ({lo}, {hi}]")


class JumpPart:
    """One-sided measure on (0, inf)."""

    name: ClassVar[str] = ""

    beta0: float
    beta_achieved: bool
    eta_inf: float
    eta_achieved: bool
    # radius of exponential integrability of the tail beyond 1
    exp_radius: float = math.inf
    exp_finite_at_radius: bool = False
    dyadic_b: Optional[float] = None

    def tail(self, r: float) -> float:
        """lambda((r, inf)) for r > 0; for r == 0 the total mass."""
        raise NotImplementedError

    def moment(self, p: float, lo: float = 0.0, hi: float = math.inf) -> float:
        """int_(lo, hi] z^p lambda(dz); ``inf`` when divergent."""
        _check_region(lo, hi)
        return self._moment(float(p), float(lo), float(hi))

    def _moment(self, p: float, lo: float, hi: float) -> float:
        raise NotImplementedError

    @property
    def total_mass(self) -> float:
        return self.tail(0.0)

    def breakpoints(self) -> list[float]:
        """Points where the tail function is discontinuous or kinked."""
        return []

    def small_rv(self) -> Optional[tuple[float, float]]:
        """(beta, c) with tail(z) ~ c z^-beta as z -> 0, if regularly varying there."""
        return None

    def tail_rv_index(self) -> Optional[float]:
        """gamma with tail in RV_{-gamma} at infinity, if the tail is regularly varying."""
        return None

    def sample(self, n: int, eps: float, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` sizes from lambda restricted to (eps, inf), normalized."""
        raise NotImplementedError

    def log_moment_finite(self) -> bool:
        return True

    def has_mass(self) -> bool:
        return self.total_mass > 0

    def params(self) -> dict:
        raise NotImplementedError

    def to_text(self) -> str:
        from .text import format_family

        return format_family(self)

    def _require_finite_tail(self, eps: float) -> float:
        mass = self.tail(eps)
        if not math.isfinite(mass):
            raise DomainError(f"{self.name}: lambda((eps, inf)) is infinite for eps={eps}")
        return mass


@dataclass(frozen=True)
class CompoundPoisson(JumpPart):
    """Finite jump measure ``rate * F`` with F atoms or a shifted exponential."""

    rate: float
    values: tuple = ()
    weights: tuple = ()
    jump_rate: float = 0.0
    jump_loc: float = 0.0

    name: ClassVar[str] = "CompoundPoisson"
    beta0 = 0.0
    beta_achieved = True
    eta_inf = math.inf
    eta_achieved = True

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        weights = tuple(float(w) for w in self.weights) or tuple(1.0 for _ in values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if not (self.rate >= 0 and math.isfinite(self.rate)):
            raise InvalidMeasure("CompoundPoisson requires a finite rate >= 0")
        if values and self.jump_rate:
            raise InvalidMeasure("CompoundPoisson takes either atoms or an exponential law")
        if not values and not self.jump_rate > 0:
            raise InvalidMeasure("CompoundPoisson needs jump atoms or jump_rate > 0")
        if len(values) != len(weights):
            raise InvalidMeasure("CompoundPoisson values and weights differ in length")
        if any(v <= 0 for v in values) or any(w <= 0 for w in weights):
            raise InvalidMeasure("CompoundPoisson atoms must be positive with positive weights")
        if self.jump_loc < 0:
            raise InvalidMeasure("CompoundPoisson jump_loc must be >= 0")

    @classmethod
    def atoms(cls, rate: float, values: Sequence[float], weights: Sequence[float] | None = None):
        return cls(rate=rate, values=tuple(values), weights=tuple(weights or ()))

    @classmethod
    def exponential(cls, rate: float, jump_rate: float, jump_loc: float = 0.0):
        return cls(rate=rate, jump_rate=jump_rate, jump_loc=jump_loc)

    @property
    def _is_exponential(self) -> bool:
        return not self.values

    @property
    def _probs(self) -> np.ndarray:
        w = np.array(self.weights)
        return w / w.sum()

    @property
    def exp_radius(self) -> float:
        return self.jump_rate if self._is_exponential else math.inf

    def tail(self, r):
        if self._is_exponential:
            if r < self.jump_loc:
                return self.rate
            return self.rate * math.exp(-self.jump_rate * (r - self.jump_loc))
        v = np.array(self.values)
        return float(self.rate * np.sum(self._probs[v > r]))

    def _moment(self, p, lo, hi):
        if self.rate == 0:
            return 0.0
        if not self._is_exponential:
            v = np.array(self.values)
            sel = (v > lo) & (v <= hi)
            return float(self.rate * np.sum(self._probs[sel] * v[sel] ** p))
        th, loc = self.jump_rate, self.jump_loc
        l, h = max(lo, loc), hi
        if h <= l:
            return 0.0
        if l == 0.0 and p <= -1:
            return math.inf
        if loc == 0.0:
            s = p + 1.0
            if s > 0:
                lower = special.gammainc(s, th * l) if l > 0 else 0.0
                upper = special.gammainc(s, th * h) if math.isfinite(h) else 1.0
                return float(self.rate * th ** (-p) * math.gamma(s) * (upper - lower))
            gh = upper_gamma(s, th * h) if math.isfinite(h) else 0.0
            return self.rate * th ** (-p) * (upper_gamma(s, th * l) - gh)
        dens = lambda z: z**p * th * math.exp(-th * (z - loc))
        return self.rate * integrate_interval(dens, l, h)[0]

    def breakpoints(self):
        if self._is_exponential:
            return [self.jump_loc] if self.jump_loc > 0 else []
        return sorted(self.values)

    def small_rv(self):
        return 0.0, self.rate

    def sample(self, n, eps, rng):
        if self._is_exponential:
            return max(eps, self.jump_loc) + rng.exponential(1.0 / self.jump_rate, size=n)
        v = np.array(self.values)
        p = self._probs * (v > eps)
        if n and p.sum() == 0:
            raise DomainError("no CompoundPoisson atom exceeds eps")
        if n == 0:
            return np.empty(0)
        return v[rng.choice(v.size, size=n, p=p / p.sum())]

    def params(self):
        if self._is_exponential:
            return {"rate": self.rate, "jump_rate": self.jump_rate, "jump_loc": self.jump_loc}
        return {"rate": self.rate, "values": list(self.values), "weights": list(self.weights)}


@dataclass(frozen=True)
class StableLike(JumpPart):
    """Density c z^(-1-beta0) on (0, 1]."""

    beta0: float
    c: float = 1.0

    name: ClassVar[str] = "StableLike"
    beta_achieved = False
    eta_inf = math.inf
    eta_achieved = True

    def __post_init__(self) -> None:
        if not (0 < self.beta0 < 2):
            raise InvalidMeasure("StableLike requires 0 < beta0 < 2")
        if not self.c > 0:
            raise InvalidMeasure("StableLike requires c > 0")

    def tail(self, r):
        if r >= 1.0:
            return 0.0
        if r <= 0.0:
            return math.inf
        return self.c / self.beta0 * (r ** (-self.beta0) - 1.0)

    def _moment(self, p, lo, hi):
        h = min(hi, 1.0)
        if h <= lo:
            return 0.0
        e = p - self.beta0
        if lo == 0.0 and e <= 0:
            return math.inf
        if e == 0:
            return self.c * math.log(h / lo)
        return self.c * (h**e - lo**e) / e

    def breakpoints(self):
        return [1.0]

    def small_rv(self):
        return self.beta0, self.c / self.beta0

    def sample(self, n, eps, rng):
        if eps <= 0:
            raise DomainError("StableLike has infinite mass; eps must be > 0")
        if eps >= 1.0:
            return np.empty(0) if n == 0 else _raise_empty(self.name)
        b = self.beta0
        u = rng.random(n)
        return (1.0 + u * (eps ** (-b) - 1.0)) ** (-1.0 / b)

    def params(self):
        return {"beta0": self.beta0, "c": self.c}


def _raise_empty(name):
    raise DomainError(f"{name}: restriction to (eps, inf) is the zero measure")


@dataclass(frozen=True)
class TemperedStable(JumpPart):
    """Density c z^(-1-beta0) e^(-theta z) on (0, inf)."""

    beta0: float
    theta: float
    c: float = 1.0

    name: ClassVar[str] = "TemperedStable"
    beta_achieved = False
    eta_inf = math.inf
    eta_achieved = True
    exp_finite_at_radius = True

    def __post_init__(self) -> None:
        if not (0 < self.beta0 < 2):
            raise InvalidMeasure("TemperedStable requires 0 < beta0 < 2")
        if not (self.theta > 0 and self.c > 0):
            raise InvalidMeasure("TemperedStable requires theta > 0 and c > 0")

    @property
    def exp_radius(self) -> float:
        return self.theta

    def tail(self, r):
        if r <= 0:
            return math.inf
        return self._moment(0.0, float(r), math.inf)

    def _moment(self, p, lo, hi):
        if hi <= lo:
            return 0.0
        s = p - self.beta0
        if lo == 0.0 and s <= 0:
            return math.inf
        th = self.theta
        gh = upper_gamma(s, th * hi) if math.isfinite(hi) else 0.0
        return self.c * th ** (-s) * (upper_gamma(s, th * lo) - gh)

    def small_rv(self):
        return self.beta0, self.c / self.beta0

    def sample(self, n, eps, rng):
        if eps <= 0:
            raise DomainError("TemperedStable has infinite mass; eps must be > 0")
        mass = self.tail(eps)
        target = mass * (1.0 - rng.random(n))
        return _invert_tail(self.tail, target, eps)

    def params(self):
        return {"beta0": self.beta0, "theta": self.theta, "c": self.c}


def _invert_tail(tail, target: np.ndarray, eps: float, iters: int = 100) -> np.ndarray:
    """Vectorized bisection on log z for tail(z) = target, z > eps."""
    lo = np.full(target.shape, math.log(eps))
    hi = lo + 1.0
    tail_v = np.vectorize(tail, otypes=[float])
    while True:
        bad = tail_v(np.exp(hi)) > target
        if not bad.any():
            break
        hi = np.where(bad, hi + 2.0 * (hi - lo), hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = tail_v(np.exp(mid)) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.max(hi - lo) < 1e-14:
            break
    return np.exp(0.5 * (lo + hi))


@dataclass(frozen=True)
class ParetoTail(JumpPart):
    """Tail scale * z^(-eta) on [1, inf); no jumps below 1."""

    eta: float
    scale: float = 1.0

    name: ClassVar[str] = "ParetoTail"
    beta0 = 0.0
    beta_achieved = True
    eta_achieved = False
    exp_radius = 0.0

    def __post_init__(self) -> None:
        if not (self.eta > 0 and self.scale > 0):
            raise InvalidMeasure("ParetoTail requires eta > 0 and scale > 0")

    @property
    def eta_inf(self) -> float:
        return self.eta

    def tail(self, r):
        if r < 1.0:
            return self.scale
        return self.scale * r ** (-self.eta)

    def _moment(self, p, lo, hi):
        l = max(lo, 1.0)
        if hi <= l:
            return 0.0
        e = p - self.eta
        if math.isinf(hi) and e >= 0:
            return math.inf
        c = self.scale * self.eta
        if e == 0:
            return c * math.log(hi / l)
        hv = 0.0 if math.isinf(hi) else hi**e
        return c * (hv - l**e) / e

    def breakpoints(self):
        return [1.0]

    def small_rv(self):
        return 0.0, self.scale

    def tail_rv_index(self):
        return self.eta

    def sample(self, n, eps, rng):
        return max(eps, 1.0) * (1.0 - rng.random(n)) ** (-1.0 / self.eta)

    def params(self):
        return {"eta": self.eta, "scale": self.scale}


@dataclass(frozen=True)
class DyadicExotic(JumpPart):
    """Atoms at a_n = 2^(-2^n) with lambda((r, 1]) = a_{n-1}^(-b) on (a_n, a_{n-1}].

    Truncated after ``n_max`` + 1 atoms (a_0 .. a_{n_max}); divergence and
    the index beta_0 = b refer to the untruncated series.
    """

    b: float
    n_max: int = 6
    strict: bool = field(default=True, repr=False, compare=False)

    name: ClassVar[str] = "DyadicExotic"
    beta_achieved = False
    eta_inf = math.inf
    eta_achieved = True

    def __post_init__(self) -> None:
        if not self.b > 0:
            raise InvalidMeasure("DyadicExotic requires b > 0")
        if self.strict and self.b >= 2:
            raise InvalidMeasure(
                "DyadicExotic with b >= 2 is not a Levy measure: int (z^2 ^ 1) lambda(dz) = inf"
            )

    @property
    def beta0(self) -> float:
        return self.b

    @property
    def dyadic_b(self) -> float:
        return self.b

    def _atoms(self):
        x = dyadic_points(self.n_max)[: self.n_max + 1]
        w = x ** (-self.b)
        w[1:] -= x[:-1] ** (-self.b)
        return x, w

    def tail(self, r):
        if r <= 0:
            return math.inf
        x, w = self._atoms()
        return float(np.sum(w[x > r]))

    def _moment(self, p, lo, hi):
        if lo == 0.0 and p <= self.b:
            return math.inf
        x, w = self._atoms()
        sel = (x > lo) & (x <= hi)
        return float(np.sum(w[sel] * x[sel] ** p))

    def breakpoints(self):
        return list(self._atoms()[0])

    def sample(self, n, eps, rng):
        if eps <= 0:
            raise DomainError("DyadicExotic has infinite mass; eps must be > 0")
        x, w = self._atoms()
        p = w * (x > eps)
        if n == 0:
            return np.empty(0)
        if p.sum() == 0:
            _raise_empty(self.name)
        return x[rng.choice(x.size, size=n, p=p / p.sum())]

    def params(self):
        return {"b": self.b, "n_max": self.n_max}


@dataclass(frozen=True)
class Scaled(JumpPart):
    """Push-forward of ``base`` under z -> factor * z."""

    base: JumpPart
    factor: float

    name: ClassVar[str] = "Scaled"

    def __post_init__(self) -> None:
        if not (self.factor > 0 and math.isfinite(self.factor)):
            raise InvalidMeasure("Scaled requires a positive finite factor")

    beta0 = property(lambda self: self.base.beta0)
    beta_achieved = property(lambda self: self.base.beta_achieved)
    eta_inf = property(lambda self: self.base.eta_inf)
    eta_achieved = property(lambda self: self.base.eta_achieved)
    exp_radius = property(lambda self: self.base.exp_radius / self.factor)
    exp_finite_at_radius = property(lambda self: self.base.exp_finite_at_radius)

    def tail(self, r):
        return self.base.tail(r / self.factor)

    def _moment(self, p, lo, hi):
        return self.factor**p * self.base._moment(p, lo / self.factor, hi / self.factor)

    def breakpoints(self):
        return [self.factor * b for b in self.base.breakpoints()]

    def small_rv(self):
        rv = self.base.small_rv()
        if rv is None:
            return None
        beta, c = rv
        return beta, c * self.factor**beta

    def tail_rv_index(self):
        return self.base.tail_rv_index()

    def sample(self, n, eps, rng):
        return self.factor * self.base.sample(n, eps / self.factor, rng)

    def params(self):
        return {"base": self.base, "factor": self.factor}


@dataclass(frozen=True)
class Sum(JumpPart):
    """Sum of one-sided measures. The empty sum is the zero measure."""

    parts: tuple = ()

    name: ClassVar[str] = "Sum"

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def beta0(self):
        return max((p.beta0 for p in self.parts), default=0.0)

    @property
    def beta_achieved(self):
        b = self.beta0
        return all(p.beta_achieved for p in self.parts if p.beta0 == b)

    @property
    def eta_inf(self):
        return min((p.eta_inf for p in self.parts), default=math.inf)

    @property
    def eta_achieved(self):
        e = self.eta_inf
        return all(p.eta_achieved for p in self.parts if p.eta_inf == e)

    @property
    def exp_radius(self):
        return min((p.exp_radius for p in self.parts), default=math.inf)

    @property
    def exp_finite_at_radius(self):
        r = self.exp_radius
        return all(p.exp_finite_at_radius for p in self.parts if p.exp_radius == r)

    def tail(self, r):
        return float(sum(p.tail(r) for p in self.parts))

    def _moment(self, p, lo, hi):
        return float(sum(part._moment(p, lo, hi) for part in self.parts))

    def breakpoints(self):
        return sorted({b for p in self.parts for b in p.breakpoints()})

    def small_rv(self):
        if not self.parts:
            return 0.0, 0.0
        rvs = [p.small_rv() for p in self.parts]
        top = self.beta0
        if any(rv is None for p, rv in zip(self.parts, rvs) if p.beta0 == top):
            return None
        if top == 0:
            return 0.0, self.tail(0.0)
        return top, sum(rv[1] for p, rv in zip(self.parts, rvs) if rv is not None and rv[0] == top)

    def tail_rv_index(self):
        heavy = [p for p in self.parts if math.isfinite(p.eta_inf)]
        if not heavy:
            return None
        idx = [p.tail_rv_index() for p in heavy]
        if any(i is None for i in idx):
            return None
        return min(idx)

    def sample(self, n, eps, rng):
        masses = np.array([p.tail(eps) for p in self.parts])
        if not np.all(np.isfinite(masses)):
            raise DomainError("Sum: lambda((eps, inf)) is infinite")
        if n == 0:
            return np.empty(0)
        comp = rng.choice(len(self.parts), size=n, p=masses / masses.sum())
        out = np.empty(n)
        for j, part in enumerate(self.parts):
            sel = comp == j
            k = int(sel.sum())
            if k:
                out[sel] = part.sample(k, eps, rng)
        return out

    def params(self):
        return {"parts": list(self.parts)}


def _has_small_mass(part: JumpPart) -> bool:
    """True if the part charges every neighbourhood of 0."""
    return part._moment(0.0, 0.0, 1e-300) > 0


ZERO = Sum(())


@dataclass(frozen=True)
class LevyFamily:
    """Signed Levy measure as a (positive, negative) pair of one-sided parts."""

    positive: JumpPart = ZERO
    negative: JumpPart = ZERO

    @property
    def parts(self) -> tuple[JumpPart, ...]:
        return tuple(p for p in (self.positive, self.negative) if not _is_zero(p))

    @property
    def is_zero(self) -> bool:
        return not self.parts

    @property
    def is_positive(self) -> bool:
        return _is_zero(self.negative)

    def tail(self, r: float) -> float:
        """lambda({z : |z| > r})."""
        return float(sum(p.tail(r) for p in self.parts))

    def abs_moment(self, p: float, lo: float = 0.0, hi: float = math.inf) -> float:
        """int_{lo < |z| <= hi} |z|^p lambda(dz)."""
        _check_region(lo, hi)
        return float(sum(part._moment(float(p), float(lo), float(hi)) for part in self.parts))

    def signed_first_moment(self, lo: float = 0.0, hi: float = math.inf) -> float:
        """int_{lo < |z| <= hi} z lambda(dz); nan when both signs diverge."""
        pos = self.positive._moment(1.0, lo, hi) if not _is_zero(self.positive) else 0.0
        neg = self.negative._moment(1.0, lo, hi) if not _is_zero(self.negative) else 0.0
        if math.isinf(pos) and math.isinf(neg):
            return math.nan
        return pos - neg

    def is_levy_measure(self) -> bool:
        return math.isfinite(self.abs_moment(2.0, 0.0, 1.0)) and math.isfinite(self.tail(1.0))

    def log_moment_finite(self) -> bool:
        return all(p.log_moment_finite() for p in self.parts)

    @property
    def beta0(self) -> float:
        return max((p.beta0 for p in self.parts), default=0.0)

    @property
    def beta_achieved(self) -> bool:
        b = self.beta0
        return all(p.beta_achieved for p in self.parts if p.beta0 == b)

    @property
    def eta_inf(self) -> float:
        return min((p.eta_inf for p in self.parts), default=math.inf)

    @property
    def eta_achieved(self) -> bool:
        e = self.eta_inf
        return all(p.eta_achieved for p in self.parts if p.eta_inf == e)

    def scaled(self, factor: float) -> "LevyFamily":
        return LevyFamily(
            positive=self.positive if _is_zero(self.positive) else Scaled(self.positive, factor),
            negative=self.negative if _is_zero(self.negative) else Scaled(self.negative, factor),
        )

    def sample(self, n: int, eps: float, rng: np.random.Generator) -> np.ndarray:
        """Signed sizes from lambda restricted to {|z| > eps}, normalized."""
        mp = self.positive.tail(eps) if not _is_zero(self.positive) else 0.0
        mn = self.negative.tail(eps) if not _is_zero(self.negative) else 0.0
        if n == 0:
            return np.empty(0)
        if mn == 0:
            return self.positive.sample(n, eps, rng)
        if mp == 0:
            return -self.negative.sample(n, eps, rng)
        neg = rng.random(n) < mn / (mp + mn)
        out = np.empty(n)
        k = int(neg.sum())
        out[~neg] = self.positive.sample(n - k, eps, rng)
        out[neg] = -self.negative.sample(k, eps, rng)
        return out

    def to_text(self) -> str:
        from .text import format_levy

        return format_levy(self)


def _is_zero(part: JumpPart) -> bool:
    return isinstance(part, Sum) and not part.parts


ONE_SIDED_FAMILIES = {
    cls.name: cls
    for cls in (CompoundPoisson, StableLike, TemperedStable, ParetoTail, DyadicExotic, Scaled, Sum)
}
