import numpy as np
import pytest

from disperse1d.jost import KGrid, x_grid
from disperse1d.potential import make_potential
from disperse1d.scattering import compute_scattering

TEST_POTENTIALS = {
    "zero": {"family": "zero"},
    "sech2": {"family": "sech2", "coupling": 1.0},
    "gauss": {"family": "gaussian_well", "depth": 2.0, "width": 1.0},
    "square": {"family": "square_well", "depth": 1.0, "halfwidth": 1.0},
}

_FIELDS = {}


def scattering_for(name):
    """(V, field, sd) on the default grids, computed once per session."""
    if name not in _FIELDS:
        V = make_potential(dict(TEST_POTENTIALS[name]))
        field, sd = compute_scattering(V, KGrid(), x_grid())
        _FIELDS[name] = (V, field, sd)
    return _FIELDS[name]


@pytest.fixture(scope="session")
def sech2():
    return scattering_for("sech2")


@pytest.fixture(scope="session")
def gauss():
    return scattering_for("gauss")


@pytest.fixture(scope="session")
def zero():
    return scattering_for("zero")


@pytest.fixture(scope="session")
def square():
    return scattering_for("square")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# --- acceptance summary ---------------------------------------------------------

ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[c]
        terminalreporter.write_line(f"criterion {c:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
