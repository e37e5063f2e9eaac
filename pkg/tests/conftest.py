import numpy as np
import pytest

from vortexlab.experiments import Problem
from vortexlab.geometry import BoundaryDatum, ComponentPhase, Domain
from vortexlab.stationary import MeshParams
from vortexlab.vortex import VortexConfig

DISK = Domain.disk()


def make_problem(points, degrees, datum, domain=DISK, h_far=0.05, h_near=0.005):
    cfg = VortexConfig(points, degrees, domain)
    return Problem.build(domain, datum, cfg, MeshParams(h_far, h_near))


@pytest.fixture(scope="session")
def single():
    """One degree-one vortex off center in the unit disk, g = exp(i theta)."""
    return make_problem([(0.3, 0.1)], [1], BoundaryDatum.from_windings(1))


@pytest.fixture(scope="session")
def single_axis():
    return make_problem([(0.3, 0.0)], [1], BoundaryDatum.from_windings(1))


@pytest.fixture(scope="session")
def centered():
    return make_problem([(0.0, 0.0)], [1], BoundaryDatum.from_windings(1))


@pytest.fixture(scope="session")
def pair():
    """Two degree-one vortices at (+-0.4, 0), g = exp(2 i theta)."""
    return make_problem([(0.4, 0.0), (-0.4, 0.0)], [1, 1], BoundaryDatum.from_windings(2))


PAIR_DATUM = BoundaryDatum((ComponentPhase(2, sin=(0.0, -0.3)),))


@pytest.fixture(scope="session")
def pair_perturbed():
    return make_problem([(0.6, 0.0), (-0.6, 0.0)], [1, 1], PAIR_DATUM)


@pytest.fixture(scope="session")
def dipole():
    return make_problem([(0.3, 0.0), (-0.3, 0.0)], [1, -1], BoundaryDatum.from_windings(0))


@pytest.fixture(scope="session")
def annulus():
    dom = Domain.annulus(0.3)
    return make_problem([(0.65, 0.1)], [1], BoundaryDatum.from_windings(2, 1), domain=dom)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance lines, printed after the run
ACCEPTANCE = []


@pytest.fixture
def record():
    def add(criterion, passed, detail):
        line = f"criterion {criterion:>2}  {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE.append((criterion, line))
        print(line)
        return passed

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE, key=lambda t: t[0]):
            terminalreporter.write_line(line)
