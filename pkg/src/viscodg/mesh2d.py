"""Conforming triangular meshes, face connectivity and affine geometric factors.

Text mesh format (``#`` starts a comment)::

    vertices <Nv>
    <x> <z>                  # Nv lines
    triangles <K>
    <v0> <v1> <v2> [mat]     # K lines, 0-based vertex ids, any orientation
    boundary <Nb>
    <v0> <v1> <tag>          # optional tags for boundary edges

Boundary edges without a tag line get the tag ``"default"``.
"""

from dataclasses import dataclass, replace

import numpy as np

from .refelem import FACE_VERTICES, REF_FACE_LENGTH, in_reference_triangle


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray          # (Nv, 2)
    triangles: np.ndarray         # (K, 3), counterclockwise
    neighbors: np.ndarray         # (K, 3) element across each face, -1 on boundary
    neighbor_faces: np.ndarray    # (K, 3) face index seen from the neighbour
    boundary: dict                # tag -> (n, 2) array of (element, face)
    material_id: np.ndarray       # (K,)

    @property
    def K(self):
        return len(self.triangles)

    @property
    def areas(self):
        v = self.vertices[self.triangles]
        e1, e2 = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    @property
    def boundary_tags(self):
        return tuple(sorted(self.boundary))

    def with_materials(self, material_id):
        material_id = np.asarray(material_id, dtype=int)
        if material_id.shape != (self.K,):
            raise MeshError("material_id must have one entry per element")
        return replace(self, material_id=material_id)

    def retagged(self, mapping):
        """Rename boundary tags; several old tags may map to one new tag."""
        out = {}
        for tag, faces in self.boundary.items():
            new = mapping.get(tag, tag)
            out[new] = np.vstack([out[new], faces]) if new in out else faces
        return replace(self, boundary=out)


def _orient(vertices, triangles):
    v = vertices[triangles]
    e1, e2 = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    if np.any(np.abs(det) < 1e-14 * np.max(np.abs(vertices)) ** 2):
        bad = np.flatnonzero(np.abs(det) < 1e-14 * np.max(np.abs(vertices)) ** 2)
        raise MeshError(f"degenerate (zero-area) elements: {bad[:10].tolist()}")
    tri = triangles.copy()
    flip = det < 0
    tri[flip, 1], tri[flip, 2] = triangles[flip, 2], triangles[flip, 1]
    return tri


def connect(vertices, triangles, boundary_tags=None, material_id=None):
    """Build the mesh with face neighbours and boundary tags.

    ``boundary_tags`` maps a frozenset of two vertex ids to a tag name.
    """
    vertices = np.asarray(vertices, dtype=float)
    triangles = _orient(vertices, np.asarray(triangles, dtype=int))
    K = len(triangles)
    faces = np.stack([np.sort(triangles[:, list(fv)], axis=1) for fv in FACE_VERTICES], axis=1)
    keys = faces.reshape(-1, 2)
    order = np.lexsort((keys[:, 1], keys[:, 0]))
    sk = keys[order]
    same = np.all(sk[1:] == sk[:-1], axis=1)
    if np.any(same[1:] & same[:-1]):
        i = np.flatnonzero(same[1:] & same[:-1])[0]
        raise MeshError(f"non-conforming mesh: edge {tuple(sk[i].tolist())} shared by more than two elements")
    neighbors = -np.ones(3 * K, dtype=int)
    neighbor_faces = -np.ones(3 * K, dtype=int)
    a, b = order[:-1][same], order[1:][same]
    neighbors[a], neighbors[b] = b // 3, a // 3
    neighbor_faces[a], neighbor_faces[b] = b % 3, a % 3
    neighbors = neighbors.reshape(K, 3)
    neighbor_faces = neighbor_faces.reshape(K, 3)

    bk, bf = np.nonzero(neighbors < 0)
    _check_hanging(vertices, faces[bk, bf])
    boundary_tags = boundary_tags or {}
    tags = {}
    for k, f in zip(bk, bf):
        tag = boundary_tags.get(frozenset(faces[k, f].tolist()), "default")
        tags.setdefault(tag, []).append((k, f))
    boundary = {t: np.array(v, dtype=int).reshape(-1, 2) for t, v in tags.items()}
    if material_id is None:
        material_id = np.zeros(K, dtype=int)
    mesh = Mesh(vertices, triangles, neighbors, neighbor_faces, boundary,
                np.asarray(material_id, dtype=int))
    for arr in (vertices, triangles, neighbors, neighbor_faces):
        arr.setflags(write=False)
    return mesh


def _check_hanging(vertices, edges):
    """Reject boundary edges with a mesh vertex strictly inside them."""
    if len(edges) == 0:
        return
    p0, p1 = vertices[edges[:, 0]], vertices[edges[:, 1]]
    d = p1 - p0
    L2 = np.sum(d * d, axis=1)
    used = np.unique(edges)
    pts = vertices[used]
    for start in range(0, len(edges), 256):
        sl = slice(start, start + 256)
        rel = pts[None, :, :] - p0[sl, None, :]
        t = np.sum(rel * d[sl, None, :], axis=2) / L2[sl, None]
        cross = rel[..., 0] * d[sl, None, 1] - rel[..., 1] * d[sl, None, 0]
        on = (np.abs(cross) <= 1e-10 * L2[sl, None]) & (t > 1e-10) & (t < 1 - 1e-10)
        if np.any(on):
            e, v = np.argwhere(on)[0]
            raise MeshError(
                f"non-conforming mesh: vertex {used[v]} hangs on edge "
                f"{tuple(edges[start + e].tolist())}"
            )


def uniform_tri_mesh(nx, nz, bounds=(0.0, 1.0, 0.0, 1.0)):
    """Rectangle split into nx*nz quads, each bisected along its diagonal.

    Boundary faces are tagged ``left``, ``right``, ``bottom`` (z = z0) and
    ``top`` (z = z1).
    """
    if nx < 1 or nz < 1:
        raise MeshError("nx and nz must be >= 1")
    x0, x1, z0, z1 = map(float, bounds)
    if not (x1 > x0 and z1 > z0):
        raise MeshError(f"degenerate bounds {bounds}")
    xs, zs = np.linspace(x0, x1, nx + 1), np.linspace(z0, z1, nz + 1)
    X, Z = np.meshgrid(xs, zs, indexing="ij")
    vertices = np.stack([X.ravel(), Z.ravel()], axis=1)
    idx = np.arange((nx + 1) * (nz + 1)).reshape(nx + 1, nz + 1)
    v00, v10 = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    v01, v11 = idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    tri = np.empty((2 * nx * nz, 3), dtype=int)
    tri[0::2] = np.stack([v00, v10, v11], axis=1)
    tri[1::2] = np.stack([v00, v11, v01], axis=1)
    tags = {}
    for i in range(nx):
        tags[frozenset((idx[i, 0], idx[i + 1, 0]))] = "bottom"
        tags[frozenset((idx[i, nz], idx[i + 1, nz]))] = "top"
    for j in range(nz):
        tags[frozenset((idx[0, j], idx[0, j + 1]))] = "left"
        tags[frozenset((idx[nx, j], idx[nx, j + 1]))] = "right"
    return connect(vertices, tri, tags)


def tag_layers(mesh, z_interface, below=1, above=0):
    """Assign material ids by element centroid height relative to an interface."""
    zc = mesh.centroids[:, 1]
    return mesh.with_materials(np.where(zc < z_interface, below, above))


# -- text format ------------------------------------------------------------


def read_mesh(path_or_text):
    """Parse the text mesh format from a path or a string containing newlines."""
    if "\n" in str(path_or_text):
        text, source = str(path_or_text), "<string>"
    else:
        with open(path_or_text) as fh:
            text, source = fh.read(), str(path_or_text)
    lines = [(i, l.split("#", 1)[0].split()) for i, l in enumerate(text.splitlines(), 1)]
    lines = [(i, t) for i, t in lines if t]
    pos = 0

    def header(name):
        nonlocal pos
        if pos >= len(lines) or lines[pos][1][0] != name or len(lines[pos][1]) != 2:
            lineno = lines[pos][0] if pos < len(lines) else "EOF"
            raise MeshError(f"{source}:{lineno}: expected '{name} <count>'")
        try:
            count = int(lines[pos][1][1])
        except ValueError:
            raise MeshError(f"{source}:{lines[pos][0]}: bad count {lines[pos][1][1]!r}") from None
        pos += 1
        block = lines[pos:pos + count]
        if len(block) != count:
            raise MeshError(f"{source}: section {name!r} is truncated")
        pos += count
        return block

    verts, tri, mat, tags = [], [], [], {}
    try:
        for lineno, t in header("vertices"):
            if len(t) != 2:
                raise MeshError(f"{source}:{lineno}: vertex line needs 'x z'")
            verts.append([float(t[0]), float(t[1])])
        for lineno, t in header("triangles"):
            if len(t) not in (3, 4):
                raise MeshError(f"{source}:{lineno}: triangle needs 3 vertex ids and an optional material id")
            tri.append([int(v) for v in t[:3]])
            mat.append(int(t[3]) if len(t) == 4 else 0)
        if pos < len(lines):
            for lineno, t in header("boundary"):
                if len(t) != 3:
                    raise MeshError(f"{source}:{lineno}: boundary line needs 'v0 v1 tag'")
                tags[frozenset((int(t[0]), int(t[1])))] = t[2]
    except ValueError as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{source}:{lineno}: {exc}") from None
    if pos < len(lines):
        raise MeshError(f"{source}:{lines[pos][0]}: unexpected trailing content")
    verts = np.array(verts, dtype=float).reshape(-1, 2)
    tri = np.array(tri, dtype=int)
    if tri.min() < 0 or tri.max() >= len(verts):
        raise MeshError(f"{source}: triangle references a missing vertex")
    return connect(verts, tri, tags, mat)


def write_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write(f"vertices {len(mesh.vertices)}\n")
        for x, z in mesh.vertices:
            fh.write(f"{float(x):.17g} {float(z):.17g}\n")
        fh.write(f"triangles {mesh.K}\n")
        for (a, b, c), m in zip(mesh.triangles, mesh.material_id):
            fh.write(f"{a} {b} {c} {m}\n")
        lines = []
        for tag in mesh.boundary_tags:
            for k, f in mesh.boundary[tag]:
                i, j = FACE_VERTICES[f]
                lines.append(f"{mesh.triangles[k, i]} {mesh.triangles[k, j]} {tag}\n")
        fh.write(f"boundary {len(lines)}\n")
        fh.writelines(lines)


# -- geometric factors ------------------------------------------------------


@dataclass(frozen=True)
class Geometry:
    """Per-element affine factors and node maps for a given reference element.

    ``x``, ``z``: (K, Np) node coordinates.  ``rx, sx, rz, sz``: (K,) chain
    rule so that d/dx = rx Dr + sx Ds.  ``J``: (K,), ``Jf``, ``nx``, ``nz``:
    (K, 3).  ``mapM``/``mapP``: (K, 3, Nfp) flat indices into (K*Np) of the
    interior and exterior traces (``mapP == mapM`` on boundary faces).
    """

    x: np.ndarray
    z: np.ndarray
    rx: np.ndarray
    sx: np.ndarray
    rz: np.ndarray
    sz: np.ndarray
    J: np.ndarray
    Jf: np.ndarray
    nx: np.ndarray
    nz: np.ndarray
    mapM: np.ndarray
    mapP: np.ndarray

    @property
    def fscale(self):
        return self.Jf / self.J[:, None]


def geometric_factors(mesh, ops):
    v = mesh.vertices[mesh.triangles]
    p0, p1, p2 = v[:, 0], v[:, 1], v[:, 2]
    r, s = ops.r, ops.s
    x = 0.5 * (-(r + s)[None] * p0[:, 0, None] + (1 + r)[None] * p1[:, 0, None] + (1 + s)[None] * p2[:, 0, None])
    z = 0.5 * (-(r + s)[None] * p0[:, 1, None] + (1 + r)[None] * p1[:, 1, None] + (1 + s)[None] * p2[:, 1, None])
    xr, zr = 0.5 * (p1 - p0).T
    xs, zs = 0.5 * (p2 - p0).T
    J = xr * zs - xs * zr
    if np.any(J <= 0):
        raise MeshError(f"inverted elements: {np.flatnonzero(J <= 0)[:10].tolist()}")
    rx, rz = zs / J, -xs / J
    sx, sz = -zr / J, xr / J

    nx = np.empty((mesh.K, 3))
    nz = np.empty((mesh.K, 3))
    Jf = np.empty((mesh.K, 3))
    for f, (a, b) in enumerate(FACE_VERTICES):
        e = v[:, b] - v[:, a]
        length = np.hypot(e[:, 0], e[:, 1])
        nx[:, f], nz[:, f] = e[:, 1] / length, -e[:, 0] / length
        Jf[:, f] = length / REF_FACE_LENGTH[f]

    K, Np, Nfp = mesh.K, ops.Np, ops.Nfp
    mapM = (np.arange(K)[:, None, None] * Np + ops.face_nodes[None, :, :]).astype(np.int64)
    mapP = mapM.copy()
    xf, zf = x.ravel(), z.ravel()
    scale = np.sqrt(mesh.areas.min())
    kk, ff = np.nonzero(mesh.neighbors >= 0)
    k2, f2 = mesh.neighbors[kk, ff], mesh.neighbor_faces[kk, ff]
    mine, theirs = mapM[kk, ff], mapM[k2, f2]
    dx = xf[mine][:, :, None] - xf[theirs][:, None, :]
    dz = zf[mine][:, :, None] - zf[theirs][:, None, :]
    dist = np.hypot(dx, dz)
    j = np.argmin(dist, axis=2)
    if np.any(np.take_along_axis(dist, j[:, :, None], 2) > 1e-8 * scale):
        raise MeshError("face nodes of neighbouring elements do not coincide")
    mapP[kk, ff] = np.take_along_axis(theirs, j, axis=1)
    for arr in (x, z, rx, sx, rz, sz, J, Jf, nx, nz, mapM, mapP):
        arr.setflags(write=False)
    return Geometry(x, z, rx, sx, rz, sz, J, Jf, nx, nz, mapM, mapP)


def locate(mesh, points, tol=1e-10):
    """Owning element (lowest id on ties) and reference coordinates of points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    v = mesh.vertices[mesh.triangles]
    p0 = v[:, 0]
    A = np.stack([v[:, 1] - p0, v[:, 2] - p0], axis=2)  # (K, 2, 2)
    Ainv = np.linalg.inv(A)
    elems, refs = [], []
    for p in points:
        lam = np.einsum("kij,kj->ki", Ainv, p[None, :] - p0)
        rs = 2.0 * lam - 1.0
        inside = np.flatnonzero(in_reference_triangle(rs, tol))
        if inside.size == 0:
            raise MeshError(f"point {tuple(p)} lies outside the mesh")
        k = inside[0]
        elems.append(k)
        refs.append(np.clip(rs[k], -1.0, 1.0))
    return np.array(elems), np.array(refs)
