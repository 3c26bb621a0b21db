"""Canonical text and dict forms for measure families.

Text form: ``Name(key=value, ...)`` where a value is a number, ``inf``, a
bracketed list, or another family. Floats are written with ``repr`` so the
round trip is exact. Examples::

    PowerDensity(a=0.5)
    Sum(parts=[StableLike(beta0=1.3, c=1.0), ParetoTail(eta=3.0, scale=1.0)])
    Levy(positive=CompoundPoisson(rate=2.0, values=[1.0], weights=[1.0]), negative=Sum(parts=[]))
"""

from __future__ import annotations

import math
import re
from typing import Any

from .levy import ONE_SIDED_FAMILIES, ZERO, JumpPart, LevyFamily
from .mixing import MIXING_FAMILIES, InvalidMeasure, MixingMeasure


def _format_value(v: Any) -> str:
    if isinstance(v, (MixingMeasure, JumpPart)):
        return format_family(v)
    if isinstance(v, LevyFamily):
        return format_levy(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def format_family(fam: MixingMeasure | JumpPart) -> str:
    args = ", ".join(f"{k}={_format_value(v)}" for k, v in fam.params().items())
    return f"{fam.name}({args})"


def format_levy(lam: LevyFamily) -> str:
    return f"Levy(positive={format_family(lam.positive)}, negative={format_family(lam.negative)})"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|inf))"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[()\[\],=]))"
)


class _Parser:
    def __init__(self, text: str, kind: str):
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise InvalidMeasure(f"cannot parse family text at {text[pos:pos + 20]!r}")
            self.tokens.append((m.lastgroup, m.group(m.lastgroup)))
            pos = m.end()
        self.i = 0
        self.kind = kind

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, expect: str | None = None):
        tok = self.peek()
        if tok[0] is None or (expect is not None and tok[1] != expect):
            raise InvalidMeasure(f"expected {expect!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def value(self, kind: str):
        typ, val = self.peek()
        if typ == "num":
            self.take()
            return float(val) if any(c in val for c in ".eEn") else int(val)
        if val == "[":
            self.take("[")
            items = []
            while self.peek()[1] != "]":
                items.append(self.value(kind))
                if self.peek()[1] == ",":
                    self.take(",")
            self.take("]")
            return items
        if typ == "name":
            return self.family(kind)
        raise InvalidMeasure(f"unexpected token {val!r}")

    def family(self, kind: str):
        _, name = self.take()
        kwargs = {}
        if self.peek()[1] == "(":
            self.take("(")
            while self.peek()[1] != ")":
                _, key = self.take()
                self.take("=")
                sub = "jump" if name in ("Levy", "Sum", "Scaled") else kind
                kwargs[key] = self.value(sub)
                if self.peek()[1] == ",":
                    self.take(",")
            self.take(")")
        return build_family(name, kwargs, kind)


def build_family(name: str, params: dict, kind: str):
    """Instantiate a family from its name and parameter mapping."""
    if kind == "levy" and name != "Levy":
        return LevyFamily(positive=build_family(name, params, "jump"))
    if name == "Levy":
        return LevyFamily(
            positive=params.get("positive", ZERO), negative=params.get("negative", ZERO)
        )
    table = MIXING_FAMILIES if kind == "mixing" else ONE_SIDED_FAMILIES
    if name not in table:
        raise InvalidMeasure(f"unknown {kind} family {name!r}")
    cls = table[name]
    try:
        return cls(**params)
    except TypeError as exc:
        raise InvalidMeasure(f"{name}: {exc}") from None


def parse_family(text: str, kind: str = "mixing"):
    """Parse a family; ``kind`` is ``"mixing"``, ``"jump"`` or ``"levy"``."""
    p = _Parser(text, kind)
    fam = p.family(kind)
    if p.i != len(p.tokens):
        raise InvalidMeasure(f"trailing text after family: {p.tokens[p.i][1]!r}")
    return fam


def family_to_dict(fam) -> dict:
    if isinstance(fam, LevyFamily):
        return {
            "family": "Levy",
            "positive": family_to_dict(fam.positive),
            "negative": family_to_dict(fam.negative),
        }
    out = {"family": fam.name}
    for k, v in fam.params().items():
        if isinstance(v, (MixingMeasure, JumpPart)):
            v = family_to_dict(v)
        elif isinstance(v, list):
            v = [family_to_dict(x) if isinstance(x, JumpPart) else x for x in v]
        out[k] = v
    return out


def family_from_dict(d: dict, kind: str = "mixing"):
    if not isinstance(d, dict) or "family" not in d:
        raise InvalidMeasure("a family must be an object with a 'family' key")
    name = d["family"]
    sub = "jump" if name in ("Levy", "Sum", "Scaled") or kind == "levy" else kind
    params = {}
    for k, v in d.items():
        if k == "family":
            continue
        if isinstance(v, dict):
            v = family_from_dict(v, sub)
        elif isinstance(v, list):
            v = [family_from_dict(x, sub) if isinstance(x, dict) else x for x in v]
        params[k] = v
    return build_family(name, params, kind)
