"""Statistical suites comparing simulated paths with growth laws and analytics.

Tolerances used here (slope margin 0.15, LIL bands [0.3, 1.6] and
[0.4, 1.3], the factor 0.5 of the MZ statistic, the 1.25 stability ratio of
the intermittency probe) are acceptance choices of this toolkit, not
constants of the underlying theory. Every report records them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ._kernels import kernel_values
from ._numeric import ols_slope
from .analytics import (
    growth_exponent,
    levy_tail_integrated,
    lil_envelope,
    mean_integrated,
    variance_integrated,
)
from .measures.levy import DyadicExotic as DyadicJumps
from .measures.levy import LevyFamily
from .measures.mixing import DyadicExotic, dyadic_points
from .measures.quadruple import GeneratingQuadruple, compute_indices, gamma_condition
from .simulator import (
    RngStream,
    SimConfig,
    make_plan,
    sample_points,
    simulate_paths,
    value_matrix,
)

MZ_EXCESS = 0.1
MZ_FACTOR = 0.5
LIL_MAX_BAND = (0.3, 1.6)
LIL_MEDIAN_BAND = (0.4, 1.3)
LIL_START = 1e3
SWEEP_START = 1e2
SLOPE_MARGIN = 0.15
INDEX_OFFSET = 0.01
PROBE_EXCESS = 0.1
PROBE_RATIO = 1.25
TAIL_Z = 3.0


class ConfigurationError(ValueError):
    """The model does not satisfy the preconditions of an experiment."""


@dataclass(frozen=True)
class Tolerances:
    """Acceptance thresholds of the suites; the defaults are the module constants."""

    mz_excess: float = MZ_EXCESS
    mz_factor: float = MZ_FACTOR
    lil_max_band: tuple = LIL_MAX_BAND
    lil_median_band: tuple = LIL_MEDIAN_BAND
    lil_start: float = LIL_START
    sweep_start: float = SWEEP_START
    slope_margin: float = SLOPE_MARGIN
    index_offset: float = INDEX_OFFSET
    probe_excess: float = PROBE_EXCESS
    probe_ratio: float = PROBE_RATIO
    tail_z: float = TAIL_Z

    def __post_init__(self) -> None:
        for name in ("lil_max_band", "lil_median_band"):
            band = tuple(float(v) for v in getattr(self, name))
            if len(band) != 2 or not band[0] <= band[1]:
                raise ConfigurationError(f"{name} must be an increasing pair")
            object.__setattr__(self, name, band)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Criterion:
    name: str
    statistic: float
    threshold: str
    passed: bool
    note: str = ""


@dataclass
class GrowthReport:
    """Outcome of one experiment: statistics plus per-criterion verdicts."""

    experiment: str
    config_digest: str
    criteria: list[Criterion] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    per_path: dict = field(default_factory=dict)
    skipped: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.skipped is None and all(c.passed for c in self.criteria)

    def add(self, name: str, statistic: float, threshold: str, passed: bool, note: str = "") -> None:
        self.criteria.append(Criterion(name, float(statistic), threshold, bool(passed), note))

    def summary(self) -> str:
        lines = [f"{self.experiment} [{self.config_digest}]: {'PASS' if self.passed else 'FAIL'}"]
        if self.skipped:
            lines.append(f"  skipped: {self.skipped}")
        for c in self.criteria:
            lines.append(
                f"  {'PASS' if c.passed else 'FAIL'} {c.name}: {c.statistic:.6g} ({c.threshold}) {c.note}".rstrip()
            )
        return "\n".join(lines)


def _digest(q: GeneratingQuadruple, cfg: SimConfig) -> str:
    import hashlib

    text = f"{q.lam.to_text()}|{q.pi.to_text()}|{q.a!r}|{q.b!r}|{q.centering}|{cfg.digest()}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _center(q: GeneratingQuadruple, times: np.ndarray) -> np.ndarray:
    out = np.empty(times.size)
    for k, t in enumerate(times):
        m = mean_integrated(q, float(t))
        if not m.is_finite:
            raise ConfigurationError("E X*(t) is not finite but the experiment centers by it")
        out[k] = m.value
    return out


# ---------------------------------------------------------------------------
# Marcinkiewicz-Zygmund


def _check_gamma(q: GeneratingQuadruple, gamma: float) -> None:
    if not 0 < gamma <= 2:
        raise ConfigurationError("gamma must lie in (0, 2]")
    g = gamma_condition(q, gamma)
    if not g.is_finite:
        raise ConfigurationError(
            f"int int (|z|/x)^{gamma} 1(|z| > x) pi(dx) lambda(dz) is infinite"
        )
    if gamma == 1 and math.isinf(q.pi.moment(-1.0 - 1e-6)):
        raise ConfigurationError("gamma = 1 needs m_(-1-delta)(pi) < inf for some delta > 0")


def run_mz_experiment(
    q: GeneratingQuadruple,
    gamma: float,
    cfg: SimConfig,
    threads: Optional[int] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> GrowthReport:
    """Decay of M_i(t) = max_{u >= t} |X*(u) - 1(gamma >= 1) E X*(u)| / u^(1/gamma + 0.1)."""
    _check_gamma(q, gamma)
    times = cfg.grid()
    t0, T = float(times[0]), float(times[-1])
    if T < 100 * t0:
        raise ConfigurationError("the grid must span at least two decades")
    center = _center(q, times) if gamma >= 1 else np.zeros(times.size)
    paths = simulate_paths(q, cfg, threads)
    x = value_matrix(paths)
    d = np.abs(x - center) / times ** (1.0 / gamma + tol.mz_excess)
    m_run = np.maximum.accumulate(d[:, ::-1], axis=1)[:, ::-1]  # max over u >= t
    first = m_run[:, 0]
    tail_start = int(np.searchsorted(times, T / 10.0))
    tail = m_run[:, tail_start]
    rep = GrowthReport("mz", _digest(q, cfg))
    med_first, med_tail = float(np.median(first)), float(np.median(tail))
    rep.stats.update(gamma=gamma, median_first=med_first, median_tail=med_tail, n_paths=len(paths))
    rep.per_path.update(M_first=first, M_tail=tail)
    rep.add(
        "mz_tail_over_first",
        med_tail / med_first if med_first > 0 else math.inf,
        f"< {tol.mz_factor}",
        med_tail < tol.mz_factor * med_first,
        "median over paths, windows: first and last decade of the grid",
    )
    return rep


# ---------------------------------------------------------------------------
# law of the iterated logarithm


def lil_normalizer(q: GeneratingQuadruple, times: np.ndarray) -> np.ndarray:
    """Envelope used by the LIL experiment on ``times`` (all > e)."""
    if q.lam.is_zero:
        if not q.b > 0:
            raise ConfigurationError("the LIL experiment needs b > 0 or a nonzero lambda")
        return np.array([lil_envelope(q, float(t)) for t in times])
    if q.b > 0:
        raise ConfigurationError("the LIL experiment covers pure-jump or pure-Gaussian models")
    if not variance_integrated(q, 1.0).is_finite:
        raise ConfigurationError("the LIL experiment needs finite variance")
    if not gamma_condition(q, 2.0).is_finite:
        raise ConfigurationError("int int (|z|/x)^2 1(|z| > x) pi(dx) lambda(dz) is infinite")
    sigma = math.sqrt(q.lam.abs_moment(2.0) * q.pi.moment(-2.0))
    return sigma * np.sqrt(2.0 * times * np.log(np.log(times)))


def run_lil_experiment(
    q: GeneratingQuadruple,
    cfg: SimConfig,
    threads: Optional[int] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> GrowthReport:
    """Bands for sup_t |X*(t) - E X*(t)| / envelope(t) over t in [10^3, T]."""
    times = cfg.grid()
    sel = times >= tol.lil_start
    if sel.sum() < 2:
        raise ConfigurationError(f"the grid needs points in [{tol.lil_start:g}, T]")
    norm = lil_normalizer(q, times[sel])
    center = _center(q, times[sel])
    paths = simulate_paths(q, cfg, threads)
    x = value_matrix(paths)[:, sel]
    sup_ratio = np.max(np.abs(x - center) / norm, axis=1)
    rep = GrowthReport("lil", _digest(q, cfg))
    mx, med = float(sup_ratio.max()), float(np.median(sup_ratio))
    rep.stats.update(max_sup_ratio=mx, median_sup_ratio=med, n_paths=len(paths))
    rep.per_path.update(sup_ratio=sup_ratio)
    lo, hi = tol.lil_max_band
    rep.add("lil_cross_path_max", mx, f"in [{lo}, {hi}]", lo <= mx <= hi)
    lo, hi = tol.lil_median_band
    rep.add("lil_median", med, f"in [{lo}, {hi}]", lo <= med <= hi)
    return rep


# ---------------------------------------------------------------------------
# growth sweep


def run_growth_sweep(
    models: Sequence[GeneratingQuadruple],
    cfg: SimConfig,
    threads: Optional[int] = None,
    names: Optional[Sequence[str]] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> list[GrowthReport]:
    """Empirical growth exponent of max over paths |X*(t) - center| against the table bound."""
    reports = []
    for k, q in enumerate(models):
        name = names[k] if names else f"model{k}"
        reports.append(_growth_one(q, cfg, threads, name, tol))
    return reports


def _growth_one(q, cfg, threads, name, tol) -> GrowthReport:
    rep = GrowthReport(f"growth:{name}", _digest(q, cfg))
    if not math.isfinite(q.pi.total_mass):
        rep.skipped = "pi is not a finite measure"
        return rep
    verdict = growth_exponent(compute_indices(q).working(tol.index_offset))
    bound = float(verdict.exponent_bound)
    times = cfg.grid()
    T = float(times[-1])
    sel = times >= tol.sweep_start
    if sel.sum() < 3:
        raise ConfigurationError(
            f"the grid needs at least three points in [{tol.sweep_start:g}, T]"
        )
    m = mean_integrated(q, 1.0)
    center = _center(q, times) if m.is_finite else np.zeros(times.size)
    paths = simulate_paths(q, cfg, threads)
    dev = np.abs(value_matrix(paths) - center)
    rep.stats.update(
        bound=bound, case_tag=verdict.case_tag, log_correction=verdict.log_correction,
        covered=verdict.covered, n_paths=len(paths),
    )
    scale = max(1.0, float(np.max(np.abs(center))))
    if float(dev.max()) <= 1e-9 * scale:
        rep.stats["degenerate_zero"] = True
        rep.skipped = "degenerate-zero path: X*(t) equals its center, the slope is undefined"
        return rep
    rep.stats["degenerate_zero"] = False
    t_fit = times[sel]
    top = dev[:, sel].max(axis=0)
    y = np.log(top)
    if verdict.log_correction:
        y = y - np.log(np.log(t_fit))
    slope, se, _ = ols_slope(np.log(t_fit), y)
    rep.stats.update(slope=slope, slope_se=se)
    rep.add(
        "slope_plus_2se",
        slope + 2.0 * se,
        f"<= bound {bound:.6g} + {tol.slope_margin}",
        slope + 2.0 * se <= bound + tol.slope_margin,
        f"slope {slope:.4f} se {se:.4f} case {verdict.case_tag}",
    )
    # no-intermittency probe: sup_{[10^2, T']} |X* - c| / t^(H + 0.1) for T' = T/2 and T
    norm = dev / times ** (bound + tol.probe_excess)
    half = sel & (times <= T / 2.0 * (1 + 1e-12))
    if half.sum() >= 1:
        s_half = float(np.median(norm[:, half].max(axis=1)))
        s_full = float(np.median(norm[:, sel].max(axis=1)))
        ratio = s_full / s_half if s_half > 0 else math.inf
        rep.stats.update(probe_half=s_half, probe_full=s_full)
        rep.add(
            "intermittency_probe_ratio",
            ratio,
            f"<= {tol.probe_ratio}",
            math.isfinite(s_full) and ratio <= tol.probe_ratio,
            "median over paths when doubling the horizon",
        )
    return rep


# ---------------------------------------------------------------------------
# Levy tail: Monte Carlo against quadrature


def verify_levy_tail(
    q: GeneratingQuadruple,
    t: float,
    levels: Sequence[float],
    cfg: SimConfig,
    n_rep: int = 10_000,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> GrowthReport:
    """Mean count of points with zeta f_t(xi, tau) > r against eta*_t(r)."""
    if not q.lam.is_positive:
        raise ConfigurationError("verify_levy_tail needs positive jumps only")
    if not math.isfinite(q.pi.total_mass):
        raise ConfigurationError("verify_levy_tail needs a finite pi")
    levels = np.sort(np.asarray(levels, dtype=float))
    tcfg = replace(cfg, horizon=float(t), times=(float(t),), grid_points=None, grid_ratio=None,
                   grid_t0=float(t), n_paths=n_rep, small_jump_cutoff=cfg.small_jump_cutoff or 0.0)
    counts = np.zeros((n_rep, levels.size))
    for i in range(n_rep):
        pts = sample_points(q, tcfg, RngStream(cfg.seed, i))
        c = np.sort(pts.zeta * kernel_values(pts.xi, pts.tau, t))
        counts[i] = c.size - np.searchsorted(c, levels, side="right")
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(n_rep)
    exact = np.array([levy_tail_integrated(q, t, float(r)) for r in levels])
    rep = GrowthReport("levy_tail", _digest(q, tcfg))
    rep.stats.update(levels=levels.tolist(), mc_mean=mean.tolist(), mc_se=se.tolist(),
                     quadrature=exact.tolist(), n_rep=n_rep)
    for r, m_, s_, e_ in zip(levels, mean, se, exact):
        ok = abs(m_ - e_) <= tol.tail_z * s_ if s_ > 0 else abs(m_ - e_) <= 1e-12
        rep.add(f"tail_r={r:g}", (m_ - e_) / s_ if s_ > 0 else 0.0, f"|z-score| <= {tol.tail_z:g}", ok,
                f"mc {m_:.5g} +- {s_:.2g}, quadrature {e_:.8g}")
    rep.add("counts_monotone", float(np.all(np.diff(mean) <= 0)), "nonincreasing in r",
            bool(np.all(np.diff(mean) <= 0)))
    return rep


# ---------------------------------------------------------------------------
# exotic dyadic measures


def exotic_threshold(a: float, b_exp: float) -> float:
    """gamma threshold 2(1 + a) - b of the dyadic pair."""
    return 2.0 * (1.0 + a) - b_exp


def exotic_partial_sums(a: float, b_exp: float, gamma: float, n_terms: int = 6) -> np.ndarray:
    """Partial sums of sum_n a_(n-1)^(2(1 + a - gamma) + gamma - b)."""
    pts = dyadic_points(n_terms)[:n_terms]
    return np.cumsum(pts ** (2.0 * (1.0 + a - gamma) + gamma - b_exp))


def verify_exotic(a: float, b_exp: float, gammas: Sequence[float]) -> GrowthReport:
    """Indices and gamma-threshold of the dyadic example pair."""
    if not (a >= 0 and b_exp > 0):
        raise ConfigurationError("verify_exotic needs a >= 0 and b_exp > 0")
    pi = DyadicExotic(a, strict=False)
    lam = LevyFamily(DyadicJumps(b_exp, strict=False))
    q = GeneratingQuadruple(lam, pi, check=False)
    idx = compute_indices(q)
    thr = exotic_threshold(a, b_exp)
    rep = GrowthReport(f"exotic(a={a:g}, b={b_exp:g})", f"a={a!r},b={b_exp!r}")
    rep.stats.update(
        threshold=thr,
        beta_exceeds_one_plus_alpha=b_exp > 1.0 + a,
        validity_problems=q.validity_problems(),
    )
    rep.add("alpha0", idx.alpha, f"== {a}", idx.alpha == a)
    rep.add("beta0", idx.beta, f"== {b_exp}", idx.beta == b_exp)
    for g in gammas:
        finite = gamma_condition(q, float(g)).is_finite
        expect = g < thr
        rep.add(f"gamma={g:g}", float(finite), f"finite iff gamma < {thr:g}", finite == expect,
                "finite" if finite else "infinite")
        if expect:
            s = exotic_partial_sums(a, b_exp, float(g))
            mono = bool(np.all(np.diff(s) > 0))
            rep.add(f"partial_sums_gamma={g:g}", float(s[-1]), "increasing and convergent", mono)
    return rep
