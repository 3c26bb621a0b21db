"""Declarative run configuration: one JSON document drives every subcommand.

Layout::

    {
      "model":      {"lambda": <family>, "pi": <family>, "a": 0.0, "b": 0.0,
                     "centering": "paper"},
      "sim":        {<SimConfig fields>},
      "experiment": {"suite": "mz", "gamma": 2.0, "tolerances": {...}, ...},
      "output":     {"dir": "out", "formats": ["csv"]}
    }

A family is either an object ``{"family": "PointMass", "x0": 1.0}`` or its
canonical text form ``"PointMass(x0=1.0)"``. Unknown keys anywhere are
rejected, and every problem is reported with the dotted path of the field.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any, Optional

from .experiments import ConfigurationError, Tolerances
from .measures.levy import LevyFamily
from .measures.mixing import InvalidMeasure, MixingMeasure
from .measures.quadruple import GeneratingQuadruple
from .measures.text import family_from_dict, family_to_dict, parse_family
from .simulator import SimConfig

SUITES = ("mz", "lil", "growth", "levy_tail", "exotic")
FORMATS = ("csv", "json")
CENTERINGS = ("paper", "none")

MODEL_KEYS = ("name", "lambda", "pi", "a", "b", "centering")
EXPERIMENT_KEYS = (
    "suite", "gamma", "t", "levels", "n_rep", "pairs", "gammas", "models",
    "times", "betas", "triples", "tolerances",
)
OUTPUT_KEYS = ("dir", "formats")
TOP_KEYS = ("model", "sim", "experiment", "output")
SIM_KEYS = tuple(f.name for f in fields(SimConfig))
TOLERANCE_KEYS = tuple(f.name for f in fields(Tolerances))


class ConfigError(ValueError):
    """Itemized configuration problems; ``errors`` holds one line per field."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ModelSpec:
    lam: LevyFamily
    pi: MixingMeasure
    a: float = 0.0
    b: float = 0.0
    centering: str = "paper"
    name: Optional[str] = None

    def quadruple(self, check: bool = True) -> GeneratingQuadruple:
        return GeneratingQuadruple(self.lam, self.pi, self.a, self.b, self.centering, check=check)

    def to_dict(self) -> dict:
        d = {
            "lambda": family_to_dict(self.lam),
            "pi": family_to_dict(self.pi),
            "a": self.a,
            "b": self.b,
            "centering": self.centering,
        }
        if self.name is not None:
            d["name"] = self.name
        return d


@dataclass(frozen=True)
class ExperimentSpec:
    suite: Optional[str] = None
    gamma: Optional[float] = None
    t: Optional[float] = None
    levels: Optional[tuple] = None
    n_rep: Optional[int] = None
    pairs: Optional[tuple] = None
    gammas: Optional[tuple] = None
    models: Optional[tuple] = None
    times: Optional[tuple] = None
    betas: Optional[tuple] = None
    triples: Optional[tuple] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    tolerance_overrides: tuple = ()

    def to_dict(self) -> dict:
        d: dict[str, Any] = {}
        for k in EXPERIMENT_KEYS:
            if k == "tolerances":
                if self.tolerance_overrides:
                    d[k] = {
                        name: _plain(getattr(self.tolerances, name))
                        for name in self.tolerance_overrides
                    }
                continue
            v = getattr(self, k)
            if v is None:
                continue
            if k == "models":
                v = [m.to_dict() for m in v]
            elif k == "triples":
                v = [[_fraction_text(x) for x in row] for row in v]
            d[k] = _plain(v)
        return d


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"
    formats: tuple = ("csv",)

    def to_dict(self) -> dict:
        return {"dir": self.dir, "formats": list(self.formats)}


@dataclass(frozen=True)
class RunConfig:
    model: Optional[ModelSpec]
    sim: Optional[SimConfig]
    experiment: ExperimentSpec
    output: OutputSpec

    def to_dict(self) -> dict:
        d: dict[str, Any] = {}
        if self.model is not None:
            d["model"] = self.model.to_dict()
        if self.sim is not None:
            d["sim"] = _plain(self.sim.to_dict())
        exp = self.experiment.to_dict()
        if exp:
            d["experiment"] = exp
        d["output"] = self.output.to_dict()
        return d

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form without the output block.

        The output location does not change any computed value, so runs that
        differ only in ``--out`` share a hash.
        """
        d = self.to_dict()
        d.pop("output", None)
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None) -> "RunConfig":
        """Apply the command-line overrides and re-validate through the parser."""
        d = self.to_dict()
        if seed is not None:
            if "sim" not in d:
                raise ConfigError(["sim: --seed needs a sim block"])
            d["sim"]["seed"] = seed
        if out is not None:
            d["output"]["dir"] = out
        return config_from_dict(d)


# ---------------------------------------------------------------------------
# parsing


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, list):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _fraction_text(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(v)


def _reject_unknown(d: dict, allowed, where: str, errors: list[str]) -> None:
    for k in d:
        if k not in allowed:
            errors.append(f"{where}.{k}: unknown key" if where else f"{k}: unknown key")


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number(d: dict, key: str, where: str, errors: list[str], default=None, lo=None, integer=False):
    if key not in d:
        return default
    v = d[key]
    path = f"{where}.{key}"
    if integer:
        if not isinstance(v, int) or isinstance(v, bool):
            errors.append(f"{path}: expected an integer, got {type(v).__name__}")
            return default
    elif not _is_number(v):
        errors.append(f"{path}: expected a number, got {type(v).__name__}")
        return default
    if not math.isfinite(v):
        errors.append(f"{path}: must be finite")
        return default
    if lo is not None and v < lo:
        errors.append(f"{path}: must be >= {lo}, got {v!r}")
        return default
    return int(v) if integer else float(v)


def _number_list(d: dict, key: str, where: str, errors: list[str], positive=True):
    if key not in d:
        return None
    v = d[key]
    path = f"{where}.{key}"
    if not isinstance(v, list) or not v or not all(_is_number(x) for x in v):
        errors.append(f"{path}: expected a nonempty list of numbers")
        return None
    if positive and not all(x > 0 for x in v):
        errors.append(f"{path}: entries must be > 0")
        return None
    return tuple(float(x) for x in v)


def _family(v, kind: str, path: str, errors: list[str]):
    try:
        if isinstance(v, str):
            return parse_family(v, kind)
        if isinstance(v, dict):
            return family_from_dict(v, kind)
        errors.append(f"{path}: expected a family object or text, got {type(v).__name__}")
    except (InvalidMeasure, ValueError, TypeError) as exc:
        errors.append(f"{path}: {exc}")
    return None


def _model(d, where: str, errors: list[str]) -> Optional[ModelSpec]:
    if not isinstance(d, dict):
        errors.append(f"{where}: expected an object")
        return None
    _reject_unknown(d, MODEL_KEYS, where, errors)
    n0 = len(errors)
    for key in ("lambda", "pi"):
        if key not in d:
            errors.append(f"{where}.{key}: required")
    lam = _family(d["lambda"], "levy", f"{where}.lambda", errors) if "lambda" in d else None
    pi = _family(d["pi"], "mixing", f"{where}.pi", errors) if "pi" in d else None
    a = _number(d, "a", where, errors, default=0.0)
    b = _number(d, "b", where, errors, default=0.0, lo=0.0)
    centering = d.get("centering", "paper")
    if centering not in CENTERINGS:
        errors.append(f"{where}.centering: must be one of {CENTERINGS}")
    name = d.get("name")
    if name is not None and not isinstance(name, str):
        errors.append(f"{where}.name: expected a string")
    if len(errors) > n0:
        return None
    spec = ModelSpec(lam, pi, a, b, centering, name)
    problems = spec.quadruple(check=False).validity_problems()
    if problems:
        errors.extend(f"{where}: {p}" for p in problems)
        return None
    return spec


def _sim(d, errors: list[str]) -> Optional[SimConfig]:
    if not isinstance(d, dict):
        errors.append("sim: expected an object")
        return None
    _reject_unknown(d, SIM_KEYS, "sim", errors)
    n0 = len(errors)
    if "horizon" not in d:
        errors.append("sim.horizon: required")
    kw: dict[str, Any] = {}
    for f in fields(SimConfig):
        if f.name not in d:
            continue
        v = d[f.name]
        path = f"sim.{f.name}"
        if f.name in ("n_paths", "seed", "grid_points"):
            if v is not None and (not isinstance(v, int) or isinstance(v, bool)):
                errors.append(f"{path}: expected an integer, got {type(v).__name__}")
                continue
        elif f.name in ("small_jump_mode", "past_scheme"):
            if not isinstance(v, str):
                errors.append(f"{path}: expected a string")
                continue
        elif f.name == "decompose":
            if not isinstance(v, bool):
                errors.append(f"{path}: expected a boolean")
                continue
        elif f.name == "times":
            if v is not None and (not isinstance(v, list) or not all(_is_number(x) for x in v)):
                errors.append(f"{path}: expected a list of numbers")
                continue
            v = None if v is None else tuple(float(x) for x in v)
        elif v is not None and not _is_number(v):
            errors.append(f"{path}: expected a number, got {type(v).__name__}")
            continue
        elif v is not None:
            v = float(v)
        kw[f.name] = v
    if len(errors) > n0:
        return None
    probe = SimConfig.__new__(SimConfig)
    for f in fields(SimConfig):
        object.__setattr__(probe, f.name, kw.get(f.name, f.default))
    problems = probe.problems()
    if problems:
        errors.extend(f"sim: {p}" for p in problems)
        return None
    return SimConfig(**kw)


def _tolerances(d, errors: list[str]) -> tuple[Tolerances, tuple]:
    where = "experiment.tolerances"
    if not isinstance(d, dict):
        errors.append(f"{where}: expected an object")
        return Tolerances(), ()
    _reject_unknown(d, TOLERANCE_KEYS, where, errors)
    kw = {}
    for k, v in d.items():
        if k not in TOLERANCE_KEYS:
            continue
        if k.endswith("_band"):
            if not (isinstance(v, list) and len(v) == 2 and all(_is_number(x) for x in v)):
                errors.append(f"{where}.{k}: expected a pair of numbers")
                continue
            kw[k] = tuple(float(x) for x in v)
        elif _is_number(v) and math.isfinite(v) and v > 0:
            kw[k] = float(v)
        else:
            errors.append(f"{where}.{k}: expected a positive number")
    try:
        tol = Tolerances(**kw)
    except ConfigurationError as exc:
        errors.append(f"{where}: {exc}")
        return Tolerances(), ()
    return tol, tuple(sorted(kw))


def _exact(v, path: str, errors: list[str]):
    """Decimal number or "inf" as an exact Fraction (inf stays float)."""
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        if isinstance(v, str) or _is_number(v):
            x = Fraction(repr(v) if isinstance(v, float) else str(v))
            return x
    except (ValueError, ZeroDivisionError):
        pass
    errors.append(f"{path}: expected a decimal number, a fraction text or 'inf'")
    return None


def _experiment(d, errors: list[str]) -> ExperimentSpec:
    where = "experiment"
    if not isinstance(d, dict):
        errors.append(f"{where}: expected an object")
        return ExperimentSpec()
    _reject_unknown(d, EXPERIMENT_KEYS, where, errors)
    suite = d.get("suite")
    if suite is not None and suite not in SUITES:
        errors.append(f"{where}.suite: must be one of {SUITES}")
        suite = None
    gamma = _number(d, "gamma", where, errors)
    t = _number(d, "t", where, errors)
    if t is not None and not t > 0:
        errors.append(f"{where}.t: must be > 0")
    n_rep = _number(d, "n_rep", where, errors, lo=2, integer=True)
    levels = _number_list(d, "levels", where, errors)
    gammas = _number_list(d, "gammas", where, errors)
    times = _number_list(d, "times", where, errors)
    betas = _number_list(d, "betas", where, errors)
    pairs = None
    if "pairs" in d:
        v = d["pairs"]
        if not (isinstance(v, list) and v and all(
            isinstance(p, list) and len(p) == 2 and all(_is_number(x) for x in p) for p in v
        )):
            errors.append(f"{where}.pairs: expected a list of [a, b_exp] pairs")
        else:
            pairs = tuple((float(p[0]), float(p[1])) for p in v)
    models = None
    if "models" in d:
        v = d["models"]
        if not isinstance(v, list) or not v:
            errors.append(f"{where}.models: expected a nonempty list of model objects")
        else:
            built = [_model(m, f"{where}.models[{k}]", errors) for k, m in enumerate(v)]
            if all(m is not None for m in built):
                models = tuple(built)
    triples = None
    if "triples" in d:
        v = d["triples"]
        if not (isinstance(v, list) and v and all(isinstance(r, list) and len(r) == 3 for r in v)):
            errors.append(f"{where}.triples: expected a list of [alpha, eta, beta] triples")
        else:
            rows = [
                tuple(_exact(x, f"{where}.triples[{k}][{j}]", errors) for j, x in enumerate(r))
                for k, r in enumerate(v)
            ]
            if all(None not in r for r in rows):
                triples = tuple(rows)
    tol, overrides = _tolerances(d.get("tolerances", {}), errors)
    return ExperimentSpec(
        suite, gamma, t, levels, n_rep, pairs, gammas, models, times, betas, triples, tol, overrides
    )


def _output(d, errors: list[str]) -> OutputSpec:
    if not isinstance(d, dict):
        errors.append("output: expected an object")
        return OutputSpec()
    _reject_unknown(d, OUTPUT_KEYS, "output", errors)
    out_dir = d.get("dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        errors.append("output.dir: expected a nonempty string")
        out_dir = "out"
    formats = d.get("formats", ["csv"])
    if not (isinstance(formats, list) and formats and all(f in FORMATS for f in formats)):
        errors.append(f"output.formats: expected a nonempty list drawn from {FORMATS}")
        formats = ["csv"]
    return OutputSpec(out_dir, tuple(dict.fromkeys(formats)))


def config_from_dict(d: Any) -> RunConfig:
    errors: list[str] = []
    if not isinstance(d, dict):
        raise ConfigError(["<root>: expected a JSON object"])
    _reject_unknown(d, TOP_KEYS, "", errors)
    model = _model(d["model"], "model", errors) if "model" in d else None
    sim = _sim(d["sim"], errors) if "sim" in d else None
    experiment = _experiment(d.get("experiment", {}), errors)
    output = _output(d.get("output", {}), errors)
    if errors:
        raise ConfigError(errors)
    return RunConfig(model, sim, experiment, output)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"<root>: invalid JSON ({exc.msg} at line {exc.lineno})"]) from None
    return config_from_dict(d)


def dump_config(cfg: RunConfig) -> str:
    """Pretty JSON; ``parse_config(dump_config(c))`` reproduces ``c``."""
    return json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n"
