"""Parametric families for the mean-reversion measure pi on (0, inf).

Every family answers the questions the analytics need in closed form:
truncated moments (with divergence decided from the parameters), the index
alpha_0, the infimum of the support, and the near-zero power of
pi((0, x]). Quadrature is only used for integrals of caller-supplied
functions against pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Optional

import numpy as np
from scipy import special

from .._numeric import DomainError, integrate_interval, integrate_log_scale, upper_gamma


class InvalidMeasure(ValueError):
    """A measure violates an existence condition of the supOU process."""


def _check_region(lo: float, hi: float) -> None:
    if not (lo >= 0.0) or not (hi > lo):
        raise DomainError(f"invalid region ({lo}, {hi}]")


def dyadic_points(n_max: int) -> np.ndarray:
    """a_n = 2^(-2^n) for n = 0..n_max + 1."""
    return np.array([2.0 ** (-(2.0**n)) for n in range(n_max + 2)])


class MixingMeasure:
    """Interface shared by all pi families."""

    name: ClassVar[str] = ""

    # filled by subclasses
    alpha0: float
    alpha_achieved: bool
    zero_power: float  # pi((0, x]) ~ x^zero_power as x -> 0; inf if no mass near 0
    support_min: float
    dyadic_a: Optional[float] = None

    def _validate(self, strict: bool) -> None:
        if strict and math.isinf(self.moment(-1.0)):
            raise InvalidMeasure(
                f"{self.to_text()}: m_-1(pi) = int x^-1 pi(dx) is infinite; "
                "the supOU process does not exist"
            )

    @property
    def total_mass(self) -> float:
        return self.moment(0.0)

    def moment(self, p: float, lo: float = 0.0, hi: float = math.inf) -> float:
        """int_(lo, hi] x^p pi(dx); ``inf`` when the integral diverges."""
        _check_region(lo, hi)
        return self._moment(float(p), float(lo), float(hi))

    def _moment(self, p: float, lo: float, hi: float) -> float:
        raise NotImplementedError

    def cdf(self, r: float) -> float:
        """pi((0, r])."""
        if r <= 0:
            return 0.0
        return self._moment(0.0, 0.0, float(r))

    def tail(self, r: float) -> float:
        """pi((r, inf))."""
        if r <= 0:
            return self.total_mass
        return self._moment(0.0, float(r), math.inf)

    def integrate(
        self, g: Callable[[float], float], lo: float = 0.0, hi: float = math.inf
    ) -> tuple[float, float]:
        """int_(lo, hi] g(x) pi(dx) and an absolute error estimate."""
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator, tilt: float = 0.0) -> np.ndarray:
        """Draw from x^tilt pi(dx), normalized."""
        raise NotImplementedError

    def rv_density(self) -> Optional[tuple[float, float]]:
        """(alpha, ell) when the density satisfies p(x) ~ alpha * ell * x^alpha at 0."""
        return None

    def params(self) -> dict:
        raise NotImplementedError

    def to_text(self) -> str:
        from .text import format_family

        return format_family(self)


@dataclass(frozen=True)
class PointMass(MixingMeasure):
    x0: float
    mass: float = 1.0
    strict: bool = field(default=True, repr=False, compare=False)

    name: ClassVar[str] = "PointMass"

    def __post_init__(self) -> None:
        if not (self.x0 > 0 and math.isfinite(self.x0)):
            raise InvalidMeasure("PointMass requires 0 < x0 < inf")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise InvalidMeasure("PointMass requires a positive finite mass")

    alpha0 = math.inf
    alpha_achieved = True
    zero_power = math.inf

    @property
    def support_min(self) -> float:
        return self.x0

    def _moment(self, p, lo, hi):
        return self.mass * self.x0**p if lo < self.x0 <= hi else 0.0

    def integrate(self, g, lo=0.0, hi=math.inf):
        if lo < self.x0 <= hi:
            return self.mass * g(self.x0), 0.0
        return 0.0, 0.0

    def sample(self, n, rng, tilt=0.0):
        return np.full(n, self.x0)

    def params(self):
        return {"x0": self.x0, "mass": self.mass}


@dataclass(frozen=True)
class PowerDensity(MixingMeasure):
    """Density (1 + a) x^a on (0, 1]; a probability measure with alpha_0 = a."""

    a: float
    strict: bool = field(default=True, repr=False, compare=False)

    name: ClassVar[str] = "PowerDensity"
    alpha_achieved = False
    support_min = 0.0

    def __post_init__(self) -> None:
        if not (self.a >= 0 and math.isfinite(self.a)):
            raise InvalidMeasure("PowerDensity requires a >= 0")
        self._validate(self.strict)

    @property
    def alpha0(self) -> float:
        return self.a

    @property
    def zero_power(self) -> float:
        return 1.0 + self.a

    def _moment(self, p, lo, hi):
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if hi <= lo:
            return 0.0
        e = p + 1.0 + self.a
        if lo == 0.0 and e <= 0:
            return math.inf
        if e == 0:
            return (1.0 + self.a) * math.log(hi / lo)
        return (1.0 + self.a) * (hi**e - lo**e) / e

    def integrate(self, g, lo=0.0, hi=math.inf):
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        c = 1.0 + self.a
        return integrate_log_scale(lambda x: g(x) * c * x**self.a, lo, hi)

    def sample(self, n, rng, tilt=0.0):
        e = 1.0 + self.a + tilt
        if e <= 0:
            raise DomainError("tilted PowerDensity is not normalizable")
        return (1.0 - rng.random(n)) ** (1.0 / e)

    def rv_density(self):
        if self.a <= 0:
            return None
        return self.a, (1.0 + self.a) / self.a

    def params(self):
        return {"a": self.a}


@dataclass(frozen=True)
class GammaDensity(MixingMeasure):
    """Gamma(shape, rate) probability density; alpha_0 = shape - 1."""

    shape: float
    rate: float = 1.0
    strict: bool = field(default=True, repr=False, compare=False)

    name: ClassVar[str] = "GammaDensity"
    alpha_achieved = False
    support_min = 0.0

    def __post_init__(self) -> None:
        if not (self.shape > 0 and self.rate > 0):
            raise InvalidMeasure("GammaDensity requires shape > 0 and rate > 0")
        self._validate(self.strict)

    @property
    def alpha0(self) -> float:
        return max(self.shape - 1.0, 0.0)

    @property
    def zero_power(self) -> float:
        return self.shape

    def _moment(self, p, lo, hi):
        k, th = self.shape, self.rate
        s = k + p
        if lo == 0.0 and s <= 0:
            return math.inf
        if s > 0:
            lower = special.gammainc(s, th * lo) if lo > 0 else 0.0
            upper = special.gammainc(s, th * hi) if math.isfinite(hi) else 1.0
            return float(math.exp(special.gammaln(s) - special.gammaln(k)) * th ** (-p) * (upper - lower))
        gl = upper_gamma(s, th * lo)
        gh = upper_gamma(s, th * hi) if math.isfinite(hi) else 0.0
        return th ** (-p) * (gl - gh) / math.gamma(k)

    def _density(self, x: float) -> float:
        k, th = self.shape, self.rate
        return math.exp(k * math.log(th) + (k - 1.0) * math.log(x) - th * x - special.gammaln(k))

    def integrate(self, g, lo=0.0, hi=math.inf):
        return integrate_log_scale(lambda x: g(x) * self._density(x), lo, hi)

    def sample(self, n, rng, tilt=0.0):
        if self.shape + tilt <= 0:
            raise DomainError("tilted GammaDensity is not normalizable")
        return rng.gamma(self.shape + tilt, 1.0 / self.rate, size=n)

    def rv_density(self):
        alpha = self.shape - 1.0
        if alpha <= 0:
            return None
        c = self.rate**self.shape / math.gamma(self.shape)
        return alpha, c / alpha

    def params(self):
        return {"shape": self.shape, "rate": self.rate}


class _Atomic(MixingMeasure):
    """Shared code for measures given by finitely many atoms (plus bins)."""

    def _atoms(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _atom_moment(self, p, lo, hi):
        x, w = self._atoms()
        sel = (x > lo) & (x <= hi)
        return float(np.sum(w[sel] * x[sel] ** p))

    def _atom_integral(self, g, lo, hi):
        x, w = self._atoms()
        return float(sum(wi * g(float(xi)) for xi, wi in zip(x, w) if lo < xi <= hi))


@dataclass(frozen=True)
class DyadicExotic(_Atomic):
    """Atoms at a_n = 2^(-2^n) with pi((0, r]) = a_n^(1+a) on (a_n, a_{n-1}].

    Accuracy note: the series is truncated after ``n_max`` atoms and the last
    atom carries the remaining mass, so pi((0, r]) is exact for
    r >= a_{n_max}. Divergence of moments is decided from the untruncated
    series.
    """

    a: float
    n_max: int = 6
    strict: bool = field(default=True, repr=False, compare=False)

    name: ClassVar[str] = "DyadicExotic"
    alpha_achieved = False
    support_min = 0.0

    def __post_init__(self) -> None:
        if not (self.a >= 0 and math.isfinite(self.a)):
            raise InvalidMeasure("DyadicExotic requires a >= 0")
        if self.n_max < 1:
            raise InvalidMeasure("DyadicExotic requires n_max >= 1")
        self._validate(self.strict)

    @property
    def alpha0(self) -> float:
        return self.a

    @property
    def zero_power(self) -> float:
        return 1.0 + self.a

    @property
    def dyadic_a(self) -> float:
        return self.a

    def _atoms(self):
        pts = dyadic_points(self.n_max)
        e = 1.0 + self.a
        x = pts[1 : self.n_max + 1]
        w = x**e - pts[2 : self.n_max + 2] ** e
        w[-1] = x[-1] ** e
        return x, w

    def _moment(self, p, lo, hi):
        if lo == 0.0 and p <= -(1.0 + self.a):
            return math.inf
        return self._atom_moment(p, lo, hi)

    def integrate(self, g, lo=0.0, hi=math.inf):
        return self._atom_integral(g, lo, hi), 0.0

    def sample(self, n, rng, tilt=0.0):
        x, w = self._atoms()
        p = w * x**tilt
        return x[rng.choice(x.size, size=n, p=p / p.sum())]

    def params(self):
        return {"a": self.a, "n_max": self.n_max}


@dataclass(frozen=True)
class Tabulated(_Atomic):
    """Finitely many atoms (x, w) plus piecewise-constant density bins (lo, hi, d)."""

    atoms: tuple = ()
    bins: tuple = ()
    strict: bool = field(default=True, repr=False, compare=False)

    name: ClassVar[str] = "Tabulated"

    def __post_init__(self) -> None:
        atoms = tuple((float(x), float(w)) for x, w in self.atoms)
        bins = tuple((float(lo), float(hi), float(d)) for lo, hi, d in self.bins)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "bins", bins)
        if not atoms and not bins:
            raise InvalidMeasure("Tabulated needs at least one atom or bin")
        for x, w in atoms:
            if not (x > 0 and w > 0 and math.isfinite(x) and math.isfinite(w)):
                raise InvalidMeasure(f"Tabulated atom ({x}, {w}) must have x > 0, w > 0")
        for lo, hi, d in bins:
            if not (0 <= lo < hi < math.inf and d > 0):
                raise InvalidMeasure(f"Tabulated bin ({lo}, {hi}, {d}) is malformed")
        self._validate(self.strict)

    def _atoms(self):
        if not self.atoms:
            return np.empty(0), np.empty(0)
        a = np.array(self.atoms)
        return a[:, 0], a[:, 1]

    @property
    def _touches_zero(self) -> bool:
        return any(lo == 0.0 for lo, _, _ in self.bins)

    @property
    def alpha0(self) -> float:
        return 0.0 if self._touches_zero else math.inf

    @property
    def alpha_achieved(self) -> bool:
        return not self._touches_zero

    @property
    def zero_power(self) -> float:
        return 1.0 if self._touches_zero else math.inf

    @property
    def support_min(self) -> float:
        cands = [x for x, _ in self.atoms] + [lo for lo, _, _ in self.bins]
        return min(cands)

    def _moment(self, p, lo, hi):
        total = self._atom_moment(p, lo, hi)
        e = p + 1.0
        for blo, bhi, d in self.bins:
            l, h = max(lo, blo), min(hi, bhi)
            if h <= l:
                continue
            if l == 0.0 and e <= 0:
                return math.inf
            total += d * (math.log(h / l) if e == 0 else (h**e - l**e) / e)
        return total

    def integrate(self, g, lo=0.0, hi=math.inf):
        val, err = self._atom_integral(g, lo, hi), 0.0
        for blo, bhi, d in self.bins:
            l, h = max(lo, blo), min(hi, bhi)
            if h <= l:
                continue
            if l == 0.0:
                v, e = integrate_log_scale(lambda x: d * g(x), l, h)
            else:
                v, e = integrate_interval(lambda x: d * g(x), l, h)
            val += v
            err += e
        return val, err

    def sample(self, n, rng, tilt=0.0):
        x, w = self._atoms()
        e = tilt + 1.0
        bin_weights = []
        for blo, bhi, d in self.bins:
            if blo == 0.0 and e <= 0:
                raise DomainError("tilted Tabulated measure is not normalizable")
            if e == 0:
                bin_weights.append(d * math.log(bhi / blo))
            else:
                bin_weights.append(d * (bhi**e - blo**e) / e)
        weights = np.concatenate([w * x**tilt, bin_weights])
        comp = rng.choice(weights.size, size=n, p=weights / weights.sum())
        u = 1.0 - rng.random(n)
        out = np.empty(n)
        na = x.size
        atom_sel = comp < na
        out[atom_sel] = x[comp[atom_sel]]
        for j, (blo, bhi, _) in enumerate(self.bins):
            sel = comp == na + j
            if e == 0:
                out[sel] = blo * (bhi / blo) ** u[sel]
            else:
                out[sel] = (blo**e + u[sel] * (bhi**e - blo**e)) ** (1.0 / e)
        return out

    def params(self):
        return {"atoms": [list(a) for a in self.atoms], "bins": [list(b) for b in self.bins]}


MIXING_FAMILIES = {
    cls.name: cls for cls in (PointMass, PowerDensity, GammaDensity, DyadicExotic, Tabulated)
}
