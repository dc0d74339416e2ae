import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_operator
from viscodg.dg_core import (FIELDS, DGOperator, ExactBoundary, FluxOperators, NumericalInstability,
                             apply_bc, check_finite, discrete_energy, element_block, numerical_flux,
                             traction)
from viscodg.materials import load_preset
from viscodg.mesh2d import tag_layers, uniform_tri_mesh
from viscodg.refelem import build_reference
from viscodg.verify import assemble_global_operator


def energy_rate(op, q):
    """d/dt of the discrete energy along the semi-discrete flow."""
    r = op.rhs(q)
    M = op.ops.Mhat
    e_sig = np.einsum("ikn,kij,jkn->k", r[:6] @ M, op.Qs_inv, q[:6])
    e_v = op.rho * np.einsum("ikn,ikn->k", r[6:] @ M, q[6:])
    return float(np.sum(op.geom.J * (e_sig + e_v)))


def test_state_shape_and_validation(sandstone):
    op = make_operator(sandstone, n=2, N=2)
    assert op.shape == (8, 8, 6)
    with pytest.raises(ValueError):
        op.rhs(np.zeros((8, 8, 5)))
    mesh = uniform_tri_mesh(2, 2)
    with pytest.raises(ValueError, match="no boundary condition"):
        DGOperator(mesh, build_reference(2), [sandstone], bcs={"left": "absorbing"})
    with pytest.raises(ValueError):
        DGOperator(mesh, build_reference(2), [sandstone], bcs={t: "rigid" for t in mesh.boundary_tags})
    with pytest.raises(ValueError):
        DGOperator(tag_layers(mesh, 0.5), build_reference(2), [sandstone],
                   bcs={t: "absorbing" for t in mesh.boundary_tags})
    with pytest.raises(ValueError):
        FluxOperators(-1.0, 0.5)


def test_flux_helpers_component_first():
    sig = np.arange(3.0)[:, None] * np.ones((3, 4))
    t = traction(sig, 1.0, 0.0)
    assert t.shape == (2, 4) and np.allclose(t[0], 0.0) and np.allclose(t[1], 2.0)
    tj, vj = apply_bc("free_surface", sig, np.ones((2, 4)), 1.0, 0.0)
    assert np.allclose(tj, -2 * t) and np.allclose(vj, 0)
    fs, fv = numerical_flux(tj, vj, 1.0, 0.0, FluxOperators(0.0, 0.0))
    assert fs.shape == (3, 4) and fv.shape == (2, 4)
    with pytest.raises(ValueError):
        apply_bc("exact", sig, np.ones((2, 4)), 1.0, 0.0)


@pytest.mark.parametrize("bcs", ["absorbing", "free_surface"])
@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_backends_agree(sandstone, shale, rng, bcs, alpha):
    mesh = tag_layers(uniform_tri_mesh(3, 3), 0.5)
    args = (mesh, build_reference(3), [sandstone, shale], FluxOperators.uniform(alpha),
            {t: bcs for t in mesh.boundary_tags})
    fast = DGOperator(*args, backend="numba")
    slow = DGOperator(*args, backend="numpy")
    q = rng.standard_normal(fast.shape)
    a, b = fast.rhs(q, 0.3), slow.rhs(q, 0.3)
    assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()


def test_backends_agree_exact_boundary(sandstone, rng):
    func = lambda x, z, t: np.stack([np.sin(x + z + t + i) for i in range(8)])   # noqa: E731
    mesh = uniform_tri_mesh(2, 2)
    bcs = {t: ExactBoundary(func) for t in mesh.boundary_tags}
    bcs["top"] = "free_surface"
    ops = build_reference(2)
    fast = DGOperator(mesh, ops, [sandstone], bcs=bcs, backend="numba")
    slow = DGOperator(mesh, ops, [sandstone], bcs=bcs, backend="numpy")
    q = rng.standard_normal(fast.shape)
    assert np.allclose(fast.rhs(q, 0.2), slow.rhs(q, 0.2), rtol=0, atol=1e-12 * np.abs(slow.rhs(q, 0.2)).max())


def test_rhs_is_linear_and_matches_assembly(sandstone, rng):
    op = make_operator(sandstone, n=2, N=2)
    A = assemble_global_operator(op)
    for _ in range(10):
        q = rng.standard_normal(op.shape)
        r = op.rhs(q)
        assert np.abs(A @ q.ravel() - r.ravel()).max() <= 1e-12 * np.abs(r).max()


def test_constant_state_is_steady_in_elastic_interior(sandstone):
    mat = sandstone.elastic()
    mesh = uniform_tri_mesh(3, 3)
    func = lambda x, z, t: np.ones((8,) + np.shape(x)) * np.arange(1, 9).reshape((8,) + (1,) * np.ndim(x))  # noqa: E731
    op = DGOperator(mesh, build_reference(3), [mat], bcs={t: ExactBoundary(func) for t in mesh.boundary_tags})
    q = func(op.geom.x, op.geom.z, 0.0)
    q[3:6] = 0.0
    r = op.rhs(q)
    assert np.abs(r[[0, 1, 2, 6, 7]]).max() < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.0, 0.5, 1.0]),
       st.sampled_from(["absorbing", "free_surface"]))
def test_energy_never_grows(sandstone, seed, alpha, bc):
    op = make_operator(sandstone, n=2, N=2, alpha=alpha, bcs=bc)
    q = np.random.default_rng(seed).standard_normal(op.shape)
    scale = discrete_energy(q, op) * 1e3
    assert energy_rate(op, q) <= 1e-12 * scale


def test_central_flux_free_surface_conserves(sandstone, rng):
    op = make_operator(sandstone.elastic(), n=2, N=3, alpha=0.0, bcs="free_surface")
    q = rng.standard_normal(op.shape)
    q[3:6] = 0.0
    scale = discrete_energy(q, op) * 1e3
    assert abs(energy_rate(op, q)) <= 1e-12 * scale


def test_check_finite_names_element(sandstone):
    op = make_operator(sandstone, n=2, N=1)
    q = op.zeros()
    q[4, 3, 1] = np.nan
    with pytest.raises(NumericalInstability) as err:
        check_finite(q, step=7)
    assert err.value.element == 3 and err.value.step == 7


def test_element_block(sandstone, rng):
    op = make_operator(sandstone, n=2, N=1)
    q = rng.standard_normal(op.shape)
    assert np.array_equal(element_block(q, 2)[:, FIELDS.index("v3")], q[7, 2])


def test_materials_enter_per_element(sandstone):
    mesh = tag_layers(uniform_tri_mesh(2, 2), 0.5)
    shale = load_preset("clay_shale").rescaled()
    op = DGOperator(mesh, build_reference(1), [sandstone, shale],
                    bcs={t: "absorbing" for t in mesh.boundary_tags})
    assert np.allclose(op.rho[mesh.material_id == 0], sandstone.rho)
    assert np.allclose(op.rho[mesh.material_id == 1], shale.rho)
