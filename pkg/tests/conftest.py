import json
from pathlib import Path

import pytest

from supou.measures import (
    CompoundPoisson,
    GammaDensity,
    GeneratingQuadruple,
    LevyFamily,
    ParetoTail,
    PointMass,
    PowerDensity,
    StableLike,
    TemperedStable,
)

ORACLES = json.loads((Path(__file__).parent / "oracles" / "oracle_values.json").read_text())


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


def cp_unit(rate=1.0):
    """Compound Poisson with all jumps equal to 1."""
    return LevyFamily(CompoundPoisson.atoms(rate, [1.0]))


def cp_exp(rate=1.0, jump_rate=1.0):
    return LevyFamily(CompoundPoisson.exponential(rate, jump_rate))


# A spread of valid models used by property tests.
SHIPPED_MODELS = [
    GeneratingQuadruple(cp_unit(2.0), PointMass(1.0)),
    GeneratingQuadruple(cp_exp(), PointMass(1.0)),
    GeneratingQuadruple(cp_exp(), PowerDensity(1.5)),
    GeneratingQuadruple(LevyFamily(ParetoTail(2.5)), PointMass(0.5)),
    GeneratingQuadruple(LevyFamily(ParetoTail(1.5)), PowerDensity(2.0)),
    GeneratingQuadruple(LevyFamily(StableLike(1.5)), PowerDensity(1.0)),
    GeneratingQuadruple(LevyFamily(StableLike(0.7), ParetoTail(3.0)), PowerDensity(0.5)),
    GeneratingQuadruple(LevyFamily(TemperedStable(1.2, 1.0)), GammaDensity(2.0, 1.0)),
    GeneratingQuadruple(LevyFamily(ParetoTail(0.8)), PowerDensity(0.3)),
    GeneratingQuadruple(cp_unit(), PowerDensity(0.5)),
]


# One line per acceptance criterion, filled by test_acceptance.py and printed
# at the end of the session so that the verdicts are visible under -v and -q.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
