"""Poisson random measure sampling and exact evaluation of X*(t) on a grid.

A path is built from the points (xi, tau, zeta) of the Poisson random measure
with intensity pi(dx) ds lambda(dz), restricted to jumps with |zeta| > eps
and to a finite past. Two past schemes are available:

``window``
    tau uniform on (-S, T]; the neglected region is s <= -S.
``relaxation``
    future points as above on (0, T]; past points are parametrized by
    v = -xi * tau, which has intensity x^-1 pi(dx) dv lambda(dz), and are
    kept for v <= V. This handles measures pi with mass near 0 (long memory)
    where a time window would need to be enormous.

The value at grid time t is

* finite-variation lambda under the paper centering (no compensation):
  sum zeta f_t + [small-jump mean m_(0,eps](lambda) W(t)] + G(t);
* otherwise: a t m_-1(pi) + sum zeta f_t - m_(eps,1](lambda) W(t) + G(t),

where W(t) is the integral of f_t over the sampled (x, s) region, the
bracketed term is omitted in ``drop`` mode and G is the Gaussian component.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernels
from ._numeric import relative_one_minus_exp
from .analytics import factorize_covariance, gaussian_covariance, variance_integrated, kernel_l2
from .measures.levy import _is_zero
from .measures.quadruple import GeneratingQuadruple

SMALL_JUMP_MODES = ("drop", "compensate_only", "gaussian_refine")
PAST_SCHEMES = ("auto", "window", "relaxation")
THREADS_ENV = "SUPOU_THREADS"
MAX_GAUSS_GRID = 4096


class UsageError(ValueError):
    """An operation was called with inconsistent arguments."""


class UnsupportedConfiguration(ValueError):
    """The model cannot be simulated with the requested settings."""


# ---------------------------------------------------------------------------
# random streams


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream ``(seed, stream_index)`` (Philox keyed by a seed sequence)."""

    seed: int
    stream_index: int

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(ss))


def thread_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    The grid is either explicit (``times``), ``grid_points`` log-spaced
    points from ``grid_t0`` to ``horizon``, or t_k = grid_t0 * grid_ratio^k
    up to ``horizon``. ``past_truncation`` None selects S automatically so
    that the past bound is below ``past_tolerance`` times the standard
    deviation scale of X*(T). ``small_jump_cutoff`` None means eps = 0,
    which is only possible for a finite Levy measure.
    """

    horizon: float
    n_paths: int = 1
    seed: int = 0
    small_jump_cutoff: Optional[float] = None
    small_jump_mode: str = "compensate_only"
    past_truncation: Optional[float] = None
    past_scheme: str = "auto"
    past_tolerance: float = 1e-3
    grid_t0: float = 1.0
    grid_ratio: Optional[float] = None
    grid_points: Optional[int] = None
    times: Optional[tuple] = None
    decompose: bool = True

    def __post_init__(self) -> None:
        if self.times is not None:
            object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        errs = self.problems()
        if errs:
            raise UsageError("; ".join(errs))

    def problems(self) -> list[str]:
        out = []
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            out.append("horizon must be finite and > 0")
        if not (isinstance(self.n_paths, int) and self.n_paths >= 1):
            out.append("n_paths must be an integer >= 1")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            out.append("seed must be an integer in [0, 2^64)")
        if self.small_jump_cutoff is not None and not (0 <= self.small_jump_cutoff <= 1):
            out.append("small_jump_cutoff must lie in [0, 1]")
        if self.small_jump_mode not in SMALL_JUMP_MODES:
            out.append(f"small_jump_mode must be one of {SMALL_JUMP_MODES}")
        if self.past_scheme not in PAST_SCHEMES:
            out.append(f"past_scheme must be one of {PAST_SCHEMES}")
        if self.past_truncation is not None and not self.past_truncation >= 0:
            out.append("past_truncation must be >= 0")
        if not self.past_tolerance > 0:
            out.append("past_tolerance must be > 0")
        if self.times is not None:
            if not self.times or any(not (0 < t <= self.horizon) for t in self.times):
                out.append("grid times must lie in (0, horizon]")
        else:
            if not (0 < self.grid_t0 <= self.horizon):
                out.append("grid_t0 must lie in (0, horizon]")
            if self.grid_ratio is not None and not self.grid_ratio > 1:
                out.append("grid_ratio must be > 1")
            if self.grid_points is not None and not self.grid_points >= 1:
                out.append("grid_points must be >= 1")
            if self.grid_ratio is None and self.grid_points is None:
                out.append("give times, grid_ratio or grid_points")
        return out

    def grid(self) -> np.ndarray:
        if self.times is not None:
            return np.array(sorted(set(self.times)))
        if self.grid_points is not None:
            if self.grid_points == 1:
                return np.array([self.horizon])
            return np.geomspace(self.grid_t0, self.horizon, self.grid_points)
        k = int(math.floor(math.log(self.horizon / self.grid_t0) / math.log(self.grid_ratio) + 1e-12))
        return self.grid_t0 * self.grid_ratio ** np.arange(k + 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["times"] is not None:
            d["times"] = list(d["times"])
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class PointTriple:
    xi: float
    tau: float
    zeta: float


@dataclass(frozen=True)
class PointSet:
    """Sampled points plus the truncation that produced them."""

    xi: np.ndarray
    tau: np.ndarray
    zeta: np.ndarray
    scheme: str
    past_extent: float  # S for the window scheme, V for relaxation
    eps: float
    cfg_digest: str = ""

    def __len__(self) -> int:
        return int(self.xi.size)

    def triples(self) -> Iterator[PointTriple]:
        for x, s, z in zip(self.xi, self.tau, self.zeta):
            yield PointTriple(float(x), float(s), float(z))


@dataclass(frozen=True)
class TruncationCertificate:
    past_bound: float
    small_jump_std: float
    certified: bool
    scheme: str
    past_extent: float
    note: str = ""


@dataclass
class PathSample:
    path_id: int
    times: np.ndarray
    values: np.ndarray
    x_minus: Optional[np.ndarray]
    x_plus1: Optional[np.ndarray]
    x_plus2: Optional[np.ndarray]
    certificate: TruncationCertificate
    n_points: int = 0
    points: Optional[PointSet] = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# truncation analysis


def _past_integral(q: GeneratingQuadruple, t: float, scheme: str, extent: float) -> float:
    """int x^-2 (1 - e^{-xt}) w(x) pi(dx), the f_t mass of the neglected past."""
    if scheme == "relaxation":
        full = q.pi.integrate(lambda x: t * float(relative_one_minus_exp(x * t)) / x)[0]
        return math.exp(-extent) * full
    if math.isinf(extent):
        return 0.0
    return q.pi.integrate(
        lambda x: t * float(relative_one_minus_exp(x * t)) * math.exp(-x * extent) / x
    )[0]


def cutoff(q: GeneratingQuadruple, cfg: SimConfig) -> float:
    """The small-jump cutoff eps in effect for ``q``."""
    if cfg.small_jump_cutoff is not None:
        return float(cfg.small_jump_cutoff)
    if q.lam.is_zero or math.isfinite(q.lam.tail(0.0)):
        return 0.0
    raise UnsupportedConfiguration(
        "lambda has infinite activity; set small_jump_cutoff explicitly"
    )


def _uses_compensation(q: GeneratingQuadruple) -> bool:
    return not (q.centering == "paper" and q.finite_variation)


def _neglected_mass_rate(q: GeneratingQuadruple, cfg: SimConfig) -> float:
    """Coefficient M with mean absolute neglected past <= M * past_integral."""
    if q.lam.is_zero:
        return 0.0
    eps = cutoff(q, cfg)
    m = q.lam.abs_moment(1.0, eps, math.inf)
    if _uses_compensation(q):
        if eps < 1:
            m += q.lam.abs_moment(1.0, eps, 1.0)
    elif cfg.small_jump_mode != "drop" and eps > 0:
        m += q.lam.abs_moment(1.0, 0.0, eps)
    return m


def _scale(q: GeneratingQuadruple, t: float) -> float:
    """Standard deviation scale of X*(t); large jumps enter through int (z^2 ^ 1)."""
    var = variance_integrated(q, t)
    if var.is_finite:
        return math.sqrt(var.value)
    c = q.b + q.lam.abs_moment(2.0, 0.0, 1.0) + q.lam.tail(1.0)
    return math.sqrt(c * q.pi.integrate(lambda x: float(kernel_l2(x, t)))[0])


def small_jump_std(q: GeneratingQuadruple, eps: float, t: float) -> float:
    """sqrt(int_{|z|<=eps} z^2 lambda(dz) * int int f_t^2 pi(dx) ds)."""
    if eps <= 0 or q.lam.is_zero:
        return 0.0
    m2 = q.lam.abs_moment(2.0, 0.0, eps)
    if m2 == 0:
        return 0.0
    return math.sqrt(m2 * q.pi.integrate(lambda x: float(kernel_l2(x, t)))[0])


def _choose_past(q: GeneratingQuadruple, cfg: SimConfig) -> tuple[str, float]:
    """Pick the scheme and its extent (S or V)."""
    T = cfg.horizon
    if cfg.past_truncation is not None and cfg.past_scheme != "relaxation":
        return "window", float(cfg.past_truncation)
    m = _neglected_mass_rate(q, cfg)
    if not math.isfinite(m):
        m = q.lam.abs_moment(1.0, cutoff(q, cfg), 1.0) + q.lam.tail(1.0)
    scale = _scale(q, T)
    if m == 0 or scale == 0:
        return ("relaxation", 0.0) if cfg.past_scheme == "relaxation" else ("window", 0.0)
    target = cfg.past_tolerance * scale
    full = _past_integral(q, T, "relaxation", 0.0)
    if cfg.past_scheme != "relaxation":
        if m * full <= target:
            return "window", 0.0
        lo, hi = 0.0, 1.0
        while m * _past_integral(q, T, "window", hi) > target and hi < 1e12:
            lo, hi = hi, hi * 2.0
        if hi <= 10.0 * T or cfg.past_scheme == "window":
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if m * _past_integral(q, T, "window", mid) > target:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-6 * hi:
                    break
            return "window", hi
    return "relaxation", max(0.0, math.log(m * full / target))


def truncation_error(q: GeneratingQuadruple, cfg: SimConfig) -> TruncationCertificate:
    """Bound on the neglected past (mean absolute value) and the small-jump std at T."""
    scheme, extent = _choose_past(q, cfg)
    return _certificate(q, cfg, scheme, extent)


def _certificate(q, cfg, scheme, extent) -> TruncationCertificate:
    T = cfg.horizon
    m = _neglected_mass_rate(q, cfg)
    pi_t = _past_integral(q, T, scheme, extent) if m > 0 else 0.0
    note = ""
    if math.isinf(m):
        bound, certified = math.inf, False
        note = "m_1(|lambda|) is infinite: the past is not certified"
    else:
        bound, certified = m * pi_t, True
    sj = small_jump_std(q, cutoff(q, cfg), T)
    return TruncationCertificate(bound, sj, certified, scheme, extent, note)


# ---------------------------------------------------------------------------
# simulation plan: everything that is shared by all paths


@dataclass(frozen=True)
class _Plan:
    times: np.ndarray
    eps: float
    scheme: str
    extent: float
    mean_future: float
    mean_past: float
    deterministic: np.ndarray
    gauss_factor: Optional[np.ndarray]
    certificate: TruncationCertificate
    cfg_digest: str


def _sampled_f_mass(q: GeneratingQuadruple, t: float, scheme: str, extent: float) -> float:
    """W(t): integral of f_t over the sampled (x, s) region."""
    return t * q.m_minus1 - _past_integral(q, t, scheme, extent)


@lru_cache(maxsize=32)
def make_plan(q: GeneratingQuadruple, cfg: SimConfig) -> _Plan:
    if not math.isfinite(q.pi.total_mass):
        raise UnsupportedConfiguration("pi has infinite mass; only finite pi can be sampled")
    eps = cutoff(q, cfg)
    lam_mass = q.lam.tail(eps) if not q.lam.is_zero else 0.0
    if not math.isfinite(lam_mass):
        raise UnsupportedConfiguration(
            f"lambda({{|z| > {eps}}}) is infinite; increase small_jump_cutoff"
        )
    times = cfg.grid()
    scheme, extent = _choose_past(q, cfg)
    m0 = q.pi.total_mass
    if scheme == "window":
        mean_future = m0 * (cfg.horizon + extent) * lam_mass
        mean_past = 0.0
    else:
        mean_future = m0 * cfg.horizon * lam_mass
        mean_past = q.m_minus1 * extent * lam_mass

    w = np.array([_sampled_f_mass(q, float(t), scheme, extent) for t in times])
    det = np.zeros(times.size)
    if not q.lam.is_zero:
        if _uses_compensation(q):
            det += q.drift * times * q.m_minus1
            if eps < 1:
                det -= q.lam.signed_first_moment(eps, 1.0) * w
        elif cfg.small_jump_mode != "drop" and eps > 0:
            det += q.lam.signed_first_moment(0.0, eps) * w
    elif q.centering == "none":
        det += q.a * times * q.m_minus1

    gauss_b = q.b
    if cfg.small_jump_mode == "gaussian_refine" and eps > 0 and not q.lam.is_zero:
        gauss_b += q.lam.abs_moment(2.0, 0.0, eps)
    factor = None
    if gauss_b > 0:
        if times.size > MAX_GAUSS_GRID:
            raise UnsupportedConfiguration(f"Gaussian paths need at most {MAX_GAUSS_GRID} grid times")
        gq = GeneratingQuadruple(q.lam, q.pi, a=q.a, b=gauss_b, centering=q.centering, check=False)
        factor = factorize_covariance(gaussian_covariance(gq, times))
    cert = _certificate(q, cfg, scheme, extent)
    return _Plan(times, eps, scheme, extent, mean_future, mean_past, det, factor, cert, cfg.digest())


# ---------------------------------------------------------------------------
# operations


def sample_points(q: GeneratingQuadruple, cfg: SimConfig, rng) -> PointSet:
    """Draw the Poisson points with |zeta| > eps over the truncated region."""
    plan = make_plan(q, cfg)
    return _sample_points(q, cfg, plan, _as_generator(rng))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise UsageError("rng must be an RngStream or a numpy Generator")


def _sample_points(q, cfg, plan: _Plan, gen: np.random.Generator) -> PointSet:
    T = cfg.horizon
    eps = plan.eps
    n = int(gen.poisson(plan.mean_future)) if plan.mean_future > 0 else 0
    xi = q.pi.sample(n, gen)
    if plan.scheme == "window":
        tau = T - gen.random(n) * (T + plan.extent)  # uniform on (-S, T]
    else:
        tau = T - gen.random(n) * T  # uniform on (0, T]
    zeta = q.lam.sample(n, eps, gen) if n else np.empty(0)
    if plan.mean_past > 0:
        n_past = int(gen.poisson(plan.mean_past))
        xi_p = q.pi.sample(n_past, gen, tilt=-1.0)
        v = gen.random(n_past) * plan.extent
        tau_p = -v / xi_p
        zeta_p = q.lam.sample(n_past, eps, gen) if n_past else np.empty(0)
        xi = np.concatenate([xi, xi_p])
        tau = np.concatenate([tau, tau_p])
        zeta = np.concatenate([zeta, zeta_p])
    return PointSet(xi, tau, zeta, plan.scheme, plan.extent, eps, plan.cfg_digest)


def sample_gaussian_path(q: GeneratingQuadruple, times: Sequence[float], rng) -> np.ndarray:
    """Centered Gaussian vector with the covariance of the b-component on ``times``."""
    times = np.asarray(times, dtype=float)
    if not q.b > 0:
        raise UsageError("sample_gaussian_path needs b > 0")
    if times.size > MAX_GAUSS_GRID:
        raise UsageError(f"at most {MAX_GAUSS_GRID} grid times")
    factor = factorize_covariance(gaussian_covariance(q, times))
    return factor @ _as_generator(rng).standard_normal(times.size)


def evaluate_integrated(
    points: PointSet,
    q: GeneratingQuadruple,
    cfg: SimConfig,
    gauss: Optional[np.ndarray] = None,
    path_id: int = 0,
) -> PathSample:
    """X*(t_k) on the grid of ``cfg`` from sampled points and an optional Gaussian path."""
    plan = make_plan(q, cfg)
    if points.cfg_digest and points.cfg_digest != plan.cfg_digest:
        raise UsageError("points were sampled under a different SimConfig")
    total, xm, xp1, xp2 = _kernels.evaluate_points(points.xi, points.tau, points.zeta, plan.times)
    values = total + plan.deterministic
    if gauss is not None:
        gauss = np.asarray(gauss, dtype=float)
        if gauss.shape != plan.times.shape:
            raise UsageError("Gaussian path does not match the grid")
        values = values + gauss
    keep = cfg.decompose
    return PathSample(
        path_id,
        plan.times,
        values,
        xm if keep else None,
        xp1 if keep else None,
        xp2 if keep else None,
        plan.certificate,
        len(points),
    )


def decompose(points: PointSet, t: float) -> tuple[float, float, float]:
    """(X*_-(t), X*_+,1(t), X*_+,2(t)) for positive jumps."""
    if np.any(points.zeta < 0):
        raise UsageError("decompose requires positive jumps only")
    _, xm, xp1, xp2 = _kernels.evaluate_points(points.xi, points.tau, points.zeta, np.array([t]))
    return float(xm[0]), float(xp1[0]), float(xp2[0])


def simulate_path(q: GeneratingQuadruple, cfg: SimConfig, path_id: int, keep_points: bool = False) -> PathSample:
    plan = make_plan(q, cfg)
    gen = RngStream(cfg.seed, path_id).generator()
    pts = _sample_points(q, cfg, plan, gen)
    gauss = None
    if plan.gauss_factor is not None:
        gauss = plan.gauss_factor @ gen.standard_normal(plan.times.size)
    out = evaluate_integrated(pts, q, cfg, gauss, path_id)
    if keep_points:
        out.points = pts
    return out


def simulate_paths(
    q: GeneratingQuadruple,
    cfg: SimConfig,
    threads: Optional[int] = None,
    keep_points: bool = False,
    path_ids: Optional[Sequence[int]] = None,
) -> list[PathSample]:
    """Simulate paths in parallel; results are sorted by path index."""
    make_plan(q, cfg)  # build shared state once, before the workers start
    ids = list(range(cfg.n_paths)) if path_ids is None else list(path_ids)
    n_threads = threads or thread_count()
    if n_threads == 1 or len(ids) == 1:
        results = [simulate_path(q, cfg, i, keep_points) for i in ids]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(lambda i: simulate_path(q, cfg, i, keep_points), ids))
    return sorted(results, key=lambda p: p.path_id)


def value_matrix(paths: Sequence[PathSample]) -> np.ndarray:
    """Stack path values into an (n_paths, n_times) array."""
    return np.vstack([p.values for p in paths])
