"""Command-line entry point: ``supou {analyze,simulate,verify,table} --config FILE``.

Every numeric input comes from the configuration document, so the manifest
written next to the outputs is enough to reproduce a run. Exit codes: 0 on
success or a passing suite, 1 when a suite fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import __version__
from ._kernels import active_backend
from ._numeric import DomainError
from .analytics import (
    HypothesisError,
    NumericError,
    gaussian_variance,
    growth_exponent,
    levy_tail_integrated_with_error,
    limit_class,
    mean_integrated,
    moment_finite,
    tail_asymptote_constant,
    variance_integrated,
)
from .config import ConfigError, ModelSpec, RunConfig, parse_config
from .experiments import (
    ConfigurationError,
    GrowthReport,
    exotic_threshold,
    run_growth_sweep,
    run_lil_experiment,
    run_mz_experiment,
    verify_exotic,
    verify_levy_tail,
)
from .extended import Extended
from .measures.mixing import InvalidMeasure
from .measures.quadruple import IndexTriple, compute_indices
from .simulator import SimConfig, UnsupportedConfiguration, UsageError, simulate_paths, thread_count

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

CONFIG_ERRORS = (
    ConfigError,
    ConfigurationError,
    HypothesisError,
    UsageError,
    UnsupportedConfiguration,
    InvalidMeasure,
    DomainError,
)

ANALYZE_COLUMNS = ("quantity", "t", "r_or_beta", "value", "abs_error_estimate", "case_tag")
SIMULATE_COLUMNS = (
    "path_id", "t", "x_star", "x_minus", "x_plus1", "x_plus2", "past_bound", "small_jump_std",
)
VERDICT_COLUMNS = ("experiment", "criterion", "statistic", "threshold", "passed", "note")
PER_PATH_COLUMNS = ("experiment", "statistic", "path_id", "value")
TABLE_COLUMNS = (
    "source", "alpha", "eta", "beta", "row", "case_tag", "bound", "bound_float",
    "log_correction", "covered", "limit_class", "hurst",
)

DEFAULT_LEVELS = (0.5, 1.0, 2.0)
DEFAULT_BETAS = (0.5, 1.0, 2.0)
DEFAULT_TAIL_LEVELS = (0.05, 0.1, 0.2, 0.35, 0.5)
DEFAULT_EXOTIC_PAIRS = ((0.5, 1.8), (0.0, 1.0), (1.0, 2.5))


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v) -> str:
    """Floats via repr so that values round-trip exactly."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence], comments=()) -> None:
    """CSV with optional ``#`` comment lines, then the ``#schema:`` line and a header."""
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write("#schema: " + ",".join(columns) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def write_manifest(out: Path, cfg: RunConfig, command: str, extra: Optional[dict] = None) -> None:
    entries = {
        "toolkit": "supou",
        "version": __version__,
        "command": command,
        "config_hash": cfg.config_hash(),
        "seed": cfg.sim.seed if cfg.sim is not None else "",
        "kernel_backend": active_backend(),
        "config": cfg.canonical_json(),
    }
    entries.update(extra or {})
    text = "".join(f"{k}={_fmt(v)}\n" for k, v in entries.items())
    (out / "run.manifest").write_text(text, encoding="utf-8")


def _prepare_out(cfg: RunConfig) -> Path:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_model(cfg: RunConfig, command: str) -> ModelSpec:
    if cfg.model is None:
        raise ConfigError([f"model: required by {command}"])
    return cfg.model


def _require_sim(cfg: RunConfig, command: str) -> SimConfig:
    if cfg.sim is None:
        raise ConfigError([f"sim: required by {command}"])
    return cfg.sim


def _extended_row(quantity: str, t, r, ext: Extended):
    if ext.is_finite:
        return (quantity, t, r, ext.value, ext.abs_error, "finite")
    if ext.is_infinite:
        return (quantity, t, r, math.inf, None, "infinite")
    return (quantity, t, r, math.nan, None, "undefined")


# ---------------------------------------------------------------------------
# analyze


def analyze_rows(cfg: RunConfig) -> list[tuple]:
    model = _require_model(cfg, "analyze")
    q = model.quadruple()
    exp = cfg.experiment
    if exp.times is not None:
        times = exp.times
    elif cfg.sim is not None:
        times = tuple(float(t) for t in cfg.sim.grid())
    else:
        times = (1.0,)
    levels = exp.levels or DEFAULT_LEVELS
    betas = exp.betas or DEFAULT_BETAS

    rows: list[tuple] = []
    idx = compute_indices(q)
    for name in ("alpha", "beta", "eta"):
        achieved = getattr(idx, f"{name}_achieved")
        rows.append((f"index_{name}", None, None, float(getattr(idx, name)), 0.0,
                     "attained" if achieved else "not_attained"))
    verdict = growth_exponent(idx.working())
    rows.append(("growth_bound", None, None, float(verdict.exponent_bound), 0.0, verdict.case_tag))
    lc = limit_class(q)
    rows.append(("hurst", None, None, math.nan if lc.hurst is None else float(lc.hurst), None, lc.name))
    for beta in betas:
        mv = moment_finite(q, beta)
        value = mv.value.value if (mv.value is not None and mv.value.is_finite) else (
            math.inf if mv.status == "infinite" else math.nan
        )
        tag = mv.status if mv.status != "finite_if" else (
            "finite_if:" + ("finite" if mv.is_finite else "infinite")
        )
        rows.append(("moment_finite", None, beta, value, None, tag))
    for t in times:
        rows.append(_extended_row("mean", t, None, mean_integrated(q, t)))
        rows.append(_extended_row("variance", t, None, variance_integrated(q, t)))
        if q.b > 0:
            rows.append(("gaussian_variance", t, None, gaussian_variance(q, t), None, "finite"))
        for side in ("positive", "negative"):
            for r in levels:
                v, e = levy_tail_integrated_with_error(q, t, r, side)
                rows.append((f"levy_tail_{side}", t, r, v, e, "finite"))
        if exp.gamma is not None:
            try:
                c = tail_asymptote_constant(q, t, exp.gamma)
                rows.append(("tail_constant", t, exp.gamma, c, None, "finite"))
            except HypothesisError:
                rows.append(("tail_constant", t, exp.gamma, math.nan, None, "hypothesis_not_satisfied"))
    return rows


def cmd_analyze(cfg: RunConfig) -> int:
    rows = analyze_rows(cfg)
    out = _prepare_out(cfg)
    write_csv(out / "analysis.csv", ANALYZE_COLUMNS, rows,
              comments=(f"supou analyze config_hash={cfg.config_hash()}",))
    write_manifest(out, cfg, "analyze", {"outputs": "analysis.csv"})
    print(f"wrote {out / 'analysis.csv'} ({len(rows)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def simulate_rows(paths) -> list[tuple]:
    rows = []
    for p in paths:
        cert = p.certificate
        for k, t in enumerate(p.times):
            parts = [
                float(arr[k]) if arr is not None else math.nan
                for arr in (p.x_minus, p.x_plus1, p.x_plus2)
            ]
            rows.append((p.path_id, float(t), float(p.values[k]), *parts,
                         float(cert.past_bound), float(cert.small_jump_std)))
    return rows


def cmd_simulate(cfg: RunConfig) -> int:
    model = _require_model(cfg, "simulate")
    sim = _require_sim(cfg, "simulate")
    q = model.quadruple()
    paths = simulate_paths(q, sim)
    out = _prepare_out(cfg)
    h = cfg.config_hash()
    cert = paths[0].certificate
    write_csv(
        out / "paths.csv",
        SIMULATE_COLUMNS,
        simulate_rows(paths),
        comments=(
            f"supou simulate config_hash={h} seed={sim.seed}",
            f"past_scheme={cert.scheme} past_extent={cert.past_extent!r} certified={cert.certified}",
        ),
    )
    write_manifest(out, cfg, "simulate", {"outputs": "paths.csv", "threads": thread_count()})
    print(f"wrote {out / 'paths.csv'} ({len(paths)} paths)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _run_suite(cfg: RunConfig, suite: str) -> list[GrowthReport]:
    exp = cfg.experiment
    tol = exp.tolerances
    if suite == "exotic":
        pairs = exp.pairs or DEFAULT_EXOTIC_PAIRS
        reports = []
        for a, b in pairs:
            thr = exotic_threshold(a, b)
            gammas = exp.gammas or tuple(g for g in (thr - 0.1, thr + 0.1) if g > 0)
            reports.append(verify_exotic(a, b, gammas))
        return reports
    if suite == "growth":
        models = exp.models or ((_require_model(cfg, "verify growth"),))
        sim = _require_sim(cfg, "verify growth")
        qs = [m.quadruple() for m in models]
        names = [m.name or f"model{k}" for k, m in enumerate(models)]
        return run_growth_sweep(qs, sim, names=names, tol=tol)
    model = _require_model(cfg, f"verify {suite}")
    q = model.quadruple()
    if suite == "mz":
        if exp.gamma is None:
            raise ConfigError(["experiment.gamma: required by the mz suite"])
        return [run_mz_experiment(q, exp.gamma, _require_sim(cfg, "verify mz"), tol=tol)]
    if suite == "lil":
        return [run_lil_experiment(q, _require_sim(cfg, "verify lil"), tol=tol)]
    if suite == "levy_tail":
        t = exp.t if exp.t is not None else 1.0
        sim = cfg.sim or SimConfig(horizon=t, times=(t,))
        levels = exp.levels or DEFAULT_TAIL_LEVELS
        return [verify_levy_tail(q, t, levels, sim, n_rep=exp.n_rep or 10_000, tol=tol)]
    raise ConfigError([f"experiment.suite: unknown suite {suite!r}"])


def _json_safe(v):
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if hasattr(v, "tolist"):
        return _json_safe(v.tolist())
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def cmd_verify(cfg: RunConfig, suite: Optional[str]) -> int:
    suite = suite or cfg.experiment.suite
    if suite is None:
        raise ConfigError(["experiment.suite: required by verify"])
    reports = _run_suite(cfg, suite)
    out = _prepare_out(cfg)
    h = cfg.config_hash()
    verdicts = [
        (r.experiment, c.name, c.statistic, c.threshold, c.passed, c.note)
        for r in reports for c in r.criteria
    ]
    for r in reports:
        if r.skipped:
            verdicts.append((r.experiment, "skipped", math.nan, "", True, r.skipped))
    write_csv(out / "verdicts.csv", VERDICT_COLUMNS, verdicts,
              comments=(f"supou verify suite={suite} config_hash={h}",))
    per_path = [
        (r.experiment, name, i, float(v))
        for r in reports for name, arr in r.per_path.items() for i, v in enumerate(arr)
    ]
    write_csv(out / "per_path.csv", PER_PATH_COLUMNS, per_path,
              comments=(f"supou verify suite={suite} config_hash={h}",))
    outputs = ["verdicts.csv", "per_path.csv"]
    if "json" in cfg.output.formats:
        doc = [
            {
                "experiment": r.experiment,
                "config_digest": r.config_digest,
                "passed": r.passed,
                "skipped": r.skipped,
                "criteria": [c.__dict__ for c in r.criteria],
                "stats": r.stats,
            }
            for r in reports
        ]
        (out / "report.json").write_text(json.dumps(_json_safe(doc), indent=2) + "\n")
        outputs.append("report.json")
    passed = all(r.skipped is not None or r.passed for r in reports)
    write_manifest(out, cfg, f"verify {suite}", {
        "outputs": ",".join(outputs), "passed": passed, "threads": thread_count(),
    })
    for r in reports:
        print(r.summary())
    print("PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# table


def _exact_indices(idx: IndexTriple) -> IndexTriple:
    """Read decimal floats as exact fractions so boundary cases compare exactly."""

    def conv(v):
        return Fraction(repr(v)) if isinstance(v, float) and math.isfinite(v) else v

    return IndexTriple(conv(idx.alpha), True, conv(idx.beta), True, conv(idx.eta), True,
                       idx.finite_variation)


def _bound_text(v) -> str:
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def table_rows(cfg: RunConfig) -> list[tuple]:
    rows = []
    for k, (a, e, b) in enumerate(cfg.experiment.triples or ()):
        v = growth_exponent(IndexTriple(a, True, b, True, e, True))
        rows.append((f"triple{k}", _bound_text(a), _bound_text(e), _bound_text(b), v.row,
                     v.case_tag, _bound_text(v.exponent_bound), float(v.exponent_bound),
                     v.log_correction, v.covered, None, None))
    if cfg.model is not None:
        q = cfg.model.quadruple()
        idx = _exact_indices(compute_indices(q))
        v = growth_exponent(idx)
        lc = limit_class(q)
        rows.append((cfg.model.name or "model", _bound_text(idx.alpha), _bound_text(idx.eta),
                     _bound_text(idx.beta), v.row, v.case_tag, _bound_text(v.exponent_bound),
                     float(v.exponent_bound), v.log_correction, v.covered, lc.name,
                     None if lc.hurst is None else float(lc.hurst)))
    if not rows:
        raise ConfigError(["experiment.triples: table needs triples or a model block"])
    return rows


def cmd_table(cfg: RunConfig) -> int:
    rows = table_rows(cfg)
    out = _prepare_out(cfg)
    write_csv(out / "table.csv", TABLE_COLUMNS, rows,
              comments=(f"supou table config_hash={cfg.config_hash()}",))
    write_manifest(out, cfg, "table", {"outputs": "table.csv"})
    for r in rows:
        src, a, e, b, row, tag, bound, bf, logc, covered, lc, hurst = r
        case = f"case {row}" if row else "outside the table"
        line = f"{src}: alpha={a} eta={e} beta={b} -> {case} ({tag}), bound {bound} = {bf:.4f}"
        if logc:
            line += " with log correction"
        if lc is not None:
            line += f", limit_class {lc}"
            line += f", H = {hurst:.4f}" if hurst is not None else ", H undefined"
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _seed(text: str) -> int:
    try:
        v = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supou", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"supou {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "analytic quantities of the configured model"),
        ("simulate", "simulate paths of the integrated process"),
        ("verify", "run a statistical suite and report pass or fail"),
        ("table", "growth-exponent classification"),
    ):
        sp = sub.add_parser(name, help=help_text)
        if name == "verify":
            sp.add_argument("suite", nargs="?", choices=("mz", "lil", "growth", "levy_tail", "exotic"),
                            help="suite name (defaults to experiment.suite)")
        sp.add_argument("--config", required=True, help="path to the JSON configuration")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
        sp.add_argument("--seed", type=_seed, help="simulation seed (overrides sim.seed)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"--config: cannot read {args.config}: {exc.strerror}"]) from None
        cfg = parse_config(text)
        if args.seed is not None or args.out is not None:
            cfg = cfg.with_overrides(seed=args.seed, out=args.out)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        return cmd_table(cfg)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"configuration error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
