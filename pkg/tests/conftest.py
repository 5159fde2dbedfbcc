import warnings

import pytest

from gauge_lab.analytic import SolenoidSpec
from gauge_lab.fields import Grid2
from gauge_lab.propagation import coulomb_companion, switch_on_scenario

# filled by tests/test_acceptance.py: criterion -> list of (part, passed, detail)
ACCEPTANCE = {}

N_FRONT = 256
R_CELLS = 10.0
T_ON = 2.0
T_END = 100.0
RADII = (20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0)


def front_grid():
    return Grid2.centered(N_FRONT, N_FRONT - 1.0, disk_radius=R_CELLS)


@pytest.fixture(scope="session")
def ring_run():
    """Lorenz switch-on of a pure ring current, 256x256, R = 10 cells."""
    spec = SolenoidSpec(radius=R_CELLS, flux=1.0, t_on=T_ON)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return switch_on_scenario(spec, front_grid(), T_END, cadence=4)


@pytest.fixture(scope="session")
def feed_run():
    """Same switch-on with the driving charge separation included."""
    spec = SolenoidSpec(radius=R_CELLS, flux=1.0, t_on=T_ON, feed_dipole=5.0)
    return switch_on_scenario(spec, front_grid(), T_END, cadence=4)


@pytest.fixture(scope="session")
def feed_coulomb(feed_run):
    return coulomb_companion(feed_run)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}: {d}" + ("" if p else " [FAIL]") for name, p, d in parts)
        tr.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
