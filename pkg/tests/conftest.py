import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from extremal_lab.conformal import ExteriorMap
from extremal_lab.measure import AngularMeasure, RadialMeasure, RegionMeasure, discretize

settings.register_profile(
    "lab", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lab")


@pytest.fixture(scope="session")
def disk():
    return ExteriorMap.disk()


@pytest.fixture(scope="session")
def ellipse():
    return ExteriorMap.laurent([0, 0.2])


@pytest.fixture(scope="session")
def circle_mu(disk):
    return RegionMeasure(disk, RadialMeasure.delta1())


@pytest.fixture(scope="session")
def area_mu(disk):
    return RegionMeasure(disk, RadialMeasure.area())


@pytest.fixture(scope="session")
def atom_mu(disk):
    return RegionMeasure(disk, RadialMeasure.delta1(), exterior_atoms=((2.0, 1.0),))


@pytest.fixture(scope="session")
def bernstein_mu(disk):
    return RegionMeasure(disk, RadialMeasure.delta1(), AngularMeasure.bernstein(0.5))


@pytest.fixture(scope="session")
def circle_disc(circle_mu):
    return discretize(circle_mu, 256, 16)


@pytest.fixture(scope="session")
def area_disc(area_mu):
    return discretize(area_mu, 256, 32)


@pytest.fixture(scope="session")
def atom_disc(atom_mu):
    return discretize(atom_mu, 256, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record ``(passed, detail)`` for the calling acceptance test."""

    def record(number, title, passed, detail, seconds, budget=None):
        over = budget is not None and seconds > budget
        ok = bool(passed) and not over
        timing = f"{seconds:.1f} s" + (f" / {budget:g} s" if budget is not None else "")
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{timing}]"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
