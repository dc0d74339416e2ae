import numpy as np
import pytest

from viscodg.dg_core import DGOperator, FluxOperators
from viscodg.materials import load_preset
from viscodg.mesh2d import uniform_tri_mesh
from viscodg.refelem import build_reference


@pytest.fixture(scope="session")
def sandstone():
    """Isotropic sandstone in GPa, g/cm3 (speeds in km/s)."""
    return load_preset("sandstone_iso").rescaled()


@pytest.fixture(scope="session")
def shale():
    return load_preset("clay_shale").rescaled()


def make_operator(material, n=3, N=3, bcs="absorbing", alpha=0.5, bounds=(0.0, 1.0, 0.0, 1.0), **kw):
    mesh = uniform_tri_mesh(n, n, bounds)
    if isinstance(bcs, str):
        bcs = {t: bcs for t in mesh.boundary_tags}
    return DGOperator(mesh, build_reference(N), [material], FluxOperators.uniform(alpha), bcs, **kw)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
