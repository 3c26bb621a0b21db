"""Extended reals: a finite value, +infinity, or undefined."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Extended:
    kind: str
    value: Optional[float] = None
    abs_error: Optional[float] = None

    @classmethod
    def finite(cls, value: float, abs_error: float | None = None) -> "Extended":
        if not math.isfinite(value):
            raise ValueError(f"finite() got non-finite value {value!r}")
        return cls("finite", float(value), abs_error)

    @classmethod
    def from_float(cls, value: float, abs_error: float | None = None) -> "Extended":
        """Map a float where +inf has already been decided analytically."""
        if math.isnan(value):
            return UNDEFINED
        if value == math.inf:
            return INF
        if value == -math.inf:
            return UNDEFINED
        return cls.finite(value, abs_error)

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "inf"

    @property
    def is_undefined(self) -> bool:
        return self.kind == "undefined"

    def __float__(self) -> float:
        if self.kind == "finite":
            return self.value
        if self.kind == "inf":
            return math.inf
        return math.nan

    def __str__(self) -> str:
        if self.kind == "finite":
            return repr(self.value)
        return "+inf" if self.kind == "inf" else "undefined"


INF = Extended("inf")
UNDEFINED = Extended("undefined")
