import numpy as np
import pytest

from conftest import make_operator
from viscodg.dg_core import FIELDS
from viscodg.mesh2d import connect
from viscodg.dg_core import DGOperator
from viscodg.refelem import build_reference
from viscodg.vtk_io import SNAPSHOT_FIELDS, read_snapshot, snapshot_to_state, vtk_node_order, write_snapshot


@pytest.mark.parametrize("N", range(1, 7))
def test_node_order_is_permutation(N):
    perm = vtk_node_order(N)
    assert sorted(perm) == list(range((N + 1) * (N + 2) // 2))


def test_vtk_corners_first():
    ops = build_reference(3)
    perm = vtk_node_order(3)
    corners = ops.nodes[perm[:3]]
    assert np.allclose(corners, [[-1, -1], [1, -1], [-1, 1]])


def test_two_element_round_trip(sandstone, rng, tmp_path):
    v = np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]])
    mesh = connect(v, np.array([[0, 1, 2], [0, 2, 3]]))
    op = DGOperator(mesh, build_reference(3), [sandstone], bcs={"default": "absorbing"})
    q = rng.standard_normal(op.shape)
    path = write_snapshot(q, op, tmp_path / "snap.vtk", t=0.5)
    snap = read_snapshot(path)
    assert snap["cells"].shape == (2, 10)
    assert list(snap["cell_types"]) == [69, 69]
    back = snapshot_to_state(snap, op)
    for i, name in enumerate(SNAPSHOT_FIELDS):
        assert np.array_equal(back[i], q[FIELDS.index(name)])
    xz = snap["points"][:, :2].reshape(2, 10, 2)[:, np.argsort(vtk_node_order(3))]
    assert np.array_equal(xz[..., 0], op.geom.x)


def test_bit_stable(sandstone, rng, tmp_path):
    op = make_operator(sandstone, n=2, N=2)
    q = rng.standard_normal(op.shape)
    a = write_snapshot(q, op, tmp_path / "a.vtk")
    b = write_snapshot(q, op, tmp_path / "b.vtk")
    assert open(a).read() == open(b).read()
    assert set(read_snapshot(a)["cell_types"]) == {22}


def test_rejects_non_vtk(tmp_path):
    p = tmp_path / "x.vtk"
    p.write_text("hello\nworld\nBINARY\nx\n")
    with pytest.raises(ValueError):
        read_snapshot(p)
