"""Legacy ASCII VTK snapshots of the nodal state.

Each element becomes one Lagrange triangle whose points are the element's
nodes, so point data are exactly the nodal values.  Floats are written with
17 significant digits and read back bit-for-bit.
"""

import numpy as np

SNAPSHOT_FIELDS = ("v1", "v3", "s11", "s33", "s13")
_CELL_TYPE = {1: 5, 2: 22}          # linear / quadratic triangle
_LAGRANGE_TRIANGLE = 69


def _lattice(N):
    """(r index, s index) of every node, in the reference node order."""
    return [(j, i) for i in range(N + 1) for j in range(N + 1 - i)]


def _vtk_lattice(n, off=0):
    if n == 0:
        return [(off, off)]
    pts = [(off, off), (off + n, off), (off, off + n)]
    pts += [(off + k, off) for k in range(1, n)]
    pts += [(off + n - k, off + k) for k in range(1, n)]
    pts += [(off, off + n - k) for k in range(1, n)]
    if n >= 3:
        pts += _vtk_lattice(n - 3, off + 1)
    return pts


def vtk_node_order(N):
    """Permutation taking reference node order to VTK point order."""
    where = {p: i for i, p in enumerate(_lattice(N))}
    return np.array([where[p] for p in _vtk_lattice(N)])


def write_snapshot(q, op, path, t=None, fields=SNAPSHOT_FIELDS):
    """Write state ``q`` (8, K, Np) on ``op``'s mesh as a VTK unstructured grid."""
    from .dg_core import FIELDS

    K, Np, N = op.mesh.K, op.ops.Np, op.ops.N
    perm = vtk_node_order(N)
    x = op.geom.x[:, perm].ravel()
    z = op.geom.z[:, perm].ravel()
    ctype = _CELL_TYPE.get(N, _LAGRANGE_TRIANGLE)
    title = "viscodg snapshot" + ("" if t is None else f" t={float(t):.17g}")
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {K * Np} double"]
    lines += [f"{a:.17g} {b:.17g} 0" for a, b in zip(x, z)]
    lines.append(f"CELLS {K} {K * (Np + 1)}")
    ids = np.arange(K * Np).reshape(K, Np)
    lines += [f"{Np} " + " ".join(map(str, row)) for row in ids]
    lines.append(f"CELL_TYPES {K}")
    lines += [str(ctype)] * K
    lines.append(f"POINT_DATA {K * Np}")
    for name in fields:
        vals = np.asarray(q[FIELDS.index(name)])[:, perm].ravel()
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [f"{float(v):.17g}" for v in vals]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_snapshot(path):
    """Parse a file written by :func:`write_snapshot`.

    Returns a dict with ``points`` (n, 3), ``cells`` (K, Np), ``cell_types``
    and ``fields`` (name -> (n,) array).
    """
    with open(path) as fh:
        tok = fh.read().split("\n")
    it = iter(tok)
    header = [next(it) for _ in range(4)]
    if not header[0].startswith("# vtk") or header[2] != "ASCII":
        raise ValueError(f"{path}: not a legacy ASCII VTK file")
    out = {"title": header[1], "fields": {}}
    for line in it:
        parts = line.split()
        if not parts:
            continue
        key = parts[0]
        if key == "POINTS":
            n = int(parts[1])
            out["points"] = np.array([[float(v) for v in next(it).split()] for _ in range(n)])
        elif key == "CELLS":
            n = int(parts[1])
            out["cells"] = np.array([[int(v) for v in next(it).split()[1:]] for _ in range(n)])
        elif key == "CELL_TYPES":
            out["cell_types"] = np.array([int(next(it)) for _ in range(int(parts[1]))])
        elif key == "POINT_DATA":
            npts = int(parts[1])
        elif key == "SCALARS":
            next(it)                                   # LOOKUP_TABLE
            out["fields"][parts[1]] = np.array([float(next(it)) for _ in range(npts)])
        else:
            raise ValueError(f"{path}: unexpected section {key!r}")
    return out


def snapshot_to_state(snap, op, fields=SNAPSHOT_FIELDS):
    """Nodal arrays (len(fields), K, Np) in reference node order."""
    inv = np.argsort(vtk_node_order(op.ops.N))
    K, Np = op.mesh.K, op.ops.Np
    return np.stack([snap["fields"][f].reshape(K, Np)[:, inv] for f in fields])
