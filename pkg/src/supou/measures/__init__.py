"""Mixing measures pi, Levy measures lambda and the generating quadruple."""

from .levy import (
    ONE_SIDED_FAMILIES,
    ZERO,
    CompoundPoisson,
    JumpPart,
    LevyFamily,
    ParetoTail,
    Scaled,
    StableLike,
    Sum,
    TemperedStable,
)
from .levy import DyadicExotic as DyadicJumps
from .mixing import (
    MIXING_FAMILIES,
    DyadicExotic,
    GammaDensity,
    InvalidMeasure,
    MixingMeasure,
    PointMass,
    PowerDensity,
    Tabulated,
    dyadic_points,
)
from .quadruple import (
    GammaSplit,
    GeneratingQuadruple,
    IndexTriple,
    compute_indices,
    gamma_condition,
    gamma_split,
    gamma_zero_finite,
    truncated_moment,
)
from .text import family_from_dict, family_to_dict, format_family, format_levy, parse_family

__all__ = [
    "ONE_SIDED_FAMILIES", "ZERO", "CompoundPoisson", "JumpPart", "LevyFamily", "ParetoTail",
    "Scaled", "StableLike", "Sum", "TemperedStable", "DyadicJumps", "MIXING_FAMILIES",
    "DyadicExotic", "GammaDensity", "InvalidMeasure", "MixingMeasure", "PointMass",
    "PowerDensity", "Tabulated", "dyadic_points", "GammaSplit", "GeneratingQuadruple",
    "IndexTriple", "compute_indices", "gamma_condition", "gamma_split", "gamma_zero_finite",
    "truncated_moment", "family_from_dict", "family_to_dict", "format_family", "format_levy",
    "parse_family",
]
