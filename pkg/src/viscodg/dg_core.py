"""Semi-discrete DG operator for the 2D velocity-stress-memory system.

State layout is field-major, ``q[f, k, :]`` holding the Np nodal values of
field ``f`` on element ``k``; fields are ordered
``[s11, s33, s13, a1, a2, a5, v1, v3]``.  Each element obeys

    Qs^-1 dSigma/dt = A1 dV/dx + A3 dV/dz + S Sigma + face terms
    rho dV/dt       = A1^T dSigma/dx + A3^T dSigma/dz + f + face terms

with flux data ``tj = A_n^T [[sigma]]`` (traction jump) and ``vj = [[v]]``:

    stress rows:   1/2 A_n vj + alpha_s/2 A_n tj
    velocity rows: 1/2 tj + alpha_v/2 A_n^T A_n vj

The element operators use reference matrices only; material parameters
enter when the result is multiplied by ``Qs`` or ``1/rho``.  All pointwise
helpers below take components on the leading axis.
"""

from dataclasses import dataclass, field

import numpy as np

from .materials import derive_visco_coefficients
from .mesh2d import geometric_factors

FIELDS = ("s11", "s33", "s13", "a1", "a2", "a5", "v1", "v3")
NFIELDS = 8
STRESS = slice(0, 3)
MEMORY = slice(3, 6)
SIGMA = slice(0, 6)
VELOCITY = slice(6, 8)
BC_KINDS = ("free_surface", "absorbing", "exact")

# flux matrices acting on (v1, v3); memory rows are zero
A1 = np.zeros((6, 2))
A1[0, 0] = A1[2, 1] = 1.0
A3 = np.zeros((6, 2))
A3[1, 1] = A3[2, 0] = 1.0
A1.setflags(write=False)
A3.setflags(write=False)


class NumericalInstability(RuntimeError):
    """Non-finite values in the state; carries the first offending element."""

    def __init__(self, message, element=None, step=None):
        super().__init__(message)
        self.element = element
        self.step = step


def normal_matrix(n):
    """A_n = n1 A1 + n3 A3 (6 x 2)."""
    n1, n3 = n
    return n1 * A1 + n3 * A3


@dataclass(frozen=True)
class ExactBoundary:
    """Exterior state from a known solution ``func(x, z, t) -> (8, ...)``."""

    func: object


@dataclass(frozen=True)
class FluxOperators:
    alpha_sigma: float = 0.5
    alpha_v: float = 0.5

    def __post_init__(self):
        if not (self.alpha_sigma >= 0 and self.alpha_v >= 0):
            raise ValueError("penalty parameters must be non-negative")

    @classmethod
    def uniform(cls, alpha):
        return cls(alpha, alpha)


def traction(sigma, n1, n3):
    """A_n^T sigma for stresses ``sigma[:3]``; returns shape (2, ...)."""
    return np.stack([n1 * sigma[0] + n3 * sigma[2], n3 * sigma[1] + n1 * sigma[2]])


def numerical_flux(tj, vj, n1, n3, flux):
    """Stress-row (3, ...) and velocity-row (2, ...) flux from the jumps."""
    a_s, a_v = 0.5 * flux.alpha_sigma, 0.5 * flux.alpha_v
    w1 = 0.5 * vj[0] + a_s * tj[0]
    w2 = 0.5 * vj[1] + a_s * tj[1]
    nn = n1 * n3
    f_sigma = np.stack([n1 * w1, n3 * w2, n3 * w1 + n1 * w2])
    f_v = np.stack([
        0.5 * tj[0] + a_v * (vj[0] + nn * vj[1]),
        0.5 * tj[1] + a_v * (nn * vj[0] + vj[1]),
    ])
    return f_sigma, f_v


def apply_bc(kind, sigma, v, n1, n3, exterior=None):
    """Jumps (tj, vj) on boundary faces for a boundary condition ``kind``.

    ``sigma`` (3, ...) and ``v`` (2, ...) are interior traces; ``exterior``
    (8, ...) is needed only for ``exact``.
    """
    t_in = traction(sigma, n1, n3)
    if kind == "free_surface":
        return -2.0 * t_in, np.zeros_like(v)
    if kind == "absorbing":
        return -t_in, -v
    if kind == "exact":
        if exterior is None:
            raise ValueError("exact boundary needs exterior data")
        return traction(exterior[STRESS], n1, n3) - t_in, exterior[VELOCITY] - v
    raise ValueError(f"unknown boundary condition {kind!r}; expected one of {BC_KINDS}")


@dataclass
class DGOperator:
    """Everything needed to evaluate d(state)/dt on one mesh.

    ``materials`` is a sequence of MaterialSpec indexed by the mesh material
    ids.  ``bcs`` maps each boundary tag to ``"free_surface"``,
    ``"absorbing"`` or an :class:`ExactBoundary`.  ``sources`` are objects
    with an ``add_to(rate, t)`` method.
    """

    mesh: object
    ops: object
    materials: tuple
    flux: FluxOperators = field(default_factory=FluxOperators)
    bcs: dict = field(default_factory=dict)
    sources: list = field(default_factory=list)
    backend: str = "auto"

    def __post_init__(self):
        mesh, ops = self.mesh, self.ops
        self.materials = tuple(self.materials)
        ids = np.unique(mesh.material_id)
        if ids.min() < 0 or ids.max() >= len(self.materials):
            raise ValueError(
                f"mesh uses material ids {ids.tolist()} but {len(self.materials)} material(s) given"
            )
        missing = set(mesh.boundary_tags) - set(self.bcs)
        if missing:
            raise ValueError(f"no boundary condition for tag(s) {sorted(missing)}")
        for tag, bc in self.bcs.items():
            if not (isinstance(bc, ExactBoundary) or bc in ("free_surface", "absorbing")):
                raise ValueError(f"unknown boundary condition {bc!r} for tag {tag!r}")
        self.geom = g = geometric_factors(mesh, ops)
        self.coeffs = tuple(derive_visco_coefficients(m) for m in self.materials)
        mid = mesh.material_id
        self.rho = np.array([c.rho for c in self.coeffs])[mid]
        self.Qs_inv = np.stack([c.Qs_inv for c in self.coeffs])[mid]        # (K, 6, 6)
        used = np.unique(mid)
        self._groups = []
        for m in used:
            sel = slice(None) if used.size == 1 else np.flatnonzero(mid == m)
            c = self.coeffs[m]
            self._groups.append((sel, c.Qs.copy(), c.Qs @ c.S))
        self._inv_rho = (1.0 / self.rho)[:, None]

        K, Nfp = mesh.K, ops.Nfp
        self._DrT, self._DsT = ops.Dhat[0].T.copy(), ops.Dhat[1].T.copy()
        self._liftT = ops.lift.T.copy()
        self._mapM = g.mapM.reshape(K, 3 * Nfp)
        self._mapP = g.mapP.reshape(K, 3 * Nfp)
        self._n1 = np.repeat(g.nx, Nfp, axis=1)                               # (K, 3 Nfp)
        self._n3 = np.repeat(g.nz, Nfp, axis=1)
        self._fscale = np.repeat(g.fscale, Nfp, axis=1)
        self._rx, self._sx = g.rx[:, None], g.sx[:, None]
        self._rz, self._sz = g.rz[:, None], g.sz[:, None]
        self._bfaces = []
        for tag in mesh.boundary_tags:
            faces = mesh.boundary[tag]
            bc = self.bcs[tag]
            k = faces[:, 0]
            cols = (faces[:, 1][:, None] * Nfp + np.arange(Nfp)[None, :])      # (nb, Nfp)
            entry = {
                "kind": "exact" if isinstance(bc, ExactBoundary) else bc,
                "k": k[:, None], "cols": cols,
                "n1": self._n1[k[:, None], cols], "n3": self._n3[k[:, None], cols],
            }
            if isinstance(bc, ExactBoundary):
                idx = g.mapM.reshape(K, 3 * Nfp)[k[:, None], cols]
                entry["func"] = bc.func
                entry["x"] = g.x.ravel()[idx]
                entry["z"] = g.z.ravel()[idx]
            self._bfaces.append(entry)
        self._setup_backend()

    def _setup_backend(self):
        if self.backend not in ("auto", "numba", "numpy"):
            raise ValueError(f"unknown backend {self.backend!r}")
        self._kernel = None
        if self.backend == "numpy":
            return
        try:
            from ._kernels import ABSORBING, EXACT, FREE, rhs_kernel
        except ImportError:
            if self.backend == "numba":
                raise
            return
        K, ops = self.mesh.K, self.ops
        codes = {"free_surface": FREE, "absorbing": ABSORBING, "exact": EXACT}
        bcode = np.zeros((K, 3), dtype=np.int8)
        for tag, faces in self.mesh.boundary.items():
            bc = self.bcs[tag]
            bcode[faces[:, 0], faces[:, 1]] = codes["exact" if isinstance(bc, ExactBoundary) else bc]
        g = self.geom
        self._kernel = rhs_kernel
        self._kargs = (
            np.ascontiguousarray(ops.Dhat[0]), np.ascontiguousarray(ops.Dhat[1]),
            np.ascontiguousarray(ops.lift), ops.face_nodes.ravel().astype(np.int64),
            np.ascontiguousarray(self._mapP), self._n1, self._n3, self._fscale,
            g.rx.copy(), g.sx.copy(), g.rz.copy(), g.sz.copy(), bcode,
        )
        self._kmat = (
            np.ascontiguousarray(self.mesh.material_id, dtype=np.int64),
            np.stack([c.Qs for c in self.coeffs]),
            np.stack([c.Qs @ c.S for c in self.coeffs]),
            np.ascontiguousarray(1.0 / self.rho),
        )
        self._has_exact = any(b["kind"] == "exact" for b in self._bfaces)
        self._ext = np.zeros((5, K, 3 * ops.Nfp) if self._has_exact else (5, 1, 1))

    @property
    def shape(self):
        return (NFIELDS, self.mesh.K, self.ops.Np)

    def zeros(self):
        return np.zeros(self.shape)

    def jumps(self, q, t=0.0):
        """Traction and velocity jumps, each (2, K, 3 Nfp), boundary data applied."""
        flat = q.reshape(NFIELDS, -1)
        s = flat[:3]
        v = flat[6:]
        sm, vm = s[:, self._mapM], v[:, self._mapM]
        ds = s[:, self._mapP] - sm
        vj = v[:, self._mapP] - vm
        tj = traction(ds, self._n1, self._n3)
        for b in self._bfaces:
            k, cols = b["k"], b["cols"]
            ext = b["func"](b["x"], b["z"], t) if b["kind"] == "exact" else None
            tj[:, k, cols], vj[:, k, cols] = apply_bc(
                b["kind"], sm[:, k, cols], vm[:, k, cols], b["n1"], b["n3"], ext
            )
        return tj, vj

    def rhs(self, q, t=0.0, out=None):
        if q.shape != self.shape:
            raise ValueError(f"state has shape {q.shape}, expected {self.shape}")
        if self._kernel is None:
            return self.rhs_numpy(q, t, out)
        q = np.ascontiguousarray(q, dtype=float)
        if out is None:
            out = np.empty_like(q)
        if self._has_exact:
            for b in self._bfaces:
                if b["kind"] == "exact":
                    ext = np.asarray(b["func"](b["x"], b["z"], t))
                    self._ext[:, b["k"], b["cols"]] = ext[[0, 1, 2, 6, 7]]
        a_s, a_v = 0.5 * self.flux.alpha_sigma, 0.5 * self.flux.alpha_v
        self._kernel(q, out, *self._kargs, self._ext, a_s, a_v, *self._kmat)
        for src in self.sources:
            src.add_to(out, t)
        return out

    def rhs_numpy(self, q, t=0.0, out=None):
        """Vectorised reference implementation of :meth:`rhs`."""
        K, Np = self.mesh.K, self.ops.Np
        tj, vj = self.jumps(q, t)
        f_sigma, f_v = numerical_flux(tj, vj, self._n1, self._n3, self.flux)
        flux = np.concatenate([f_sigma, f_v]) * self._fscale                # (5, K, 3 Nfp)
        lifted = (flux.reshape(-1, flux.shape[-1]) @ self._liftT).reshape(5, K, Np)

        # reference derivatives of the five fields that carry flux
        sv = q[[0, 1, 2, 6, 7]].reshape(-1, Np)
        dr = (sv @ self._DrT).reshape(5, K, Np)
        ds = (sv @ self._DsT).reshape(5, K, Np)
        ux = self._rx * dr + self._sx * ds
        uz = self._rz * dr + self._sz * ds

        vol = np.zeros((6, K, Np))
        vol[0] = ux[3] + lifted[0]
        vol[1] = uz[4] + lifted[1]
        vol[2] = uz[3] + ux[4] + lifted[2]
        if out is None:
            out = np.empty_like(q)
        for sel, Qs, QsS in self._groups:
            a = vol[:, sel].reshape(6, -1)
            b = q[:6, sel].reshape(6, -1)
            out[:6, sel] = (Qs @ a + QsS @ b).reshape((6, -1, Np))
        out[6] = (ux[0] + uz[2] + lifted[3]) * self._inv_rho
        out[7] = (ux[2] + uz[1] + lifted[4]) * self._inv_rho
        for src in self.sources:
            src.add_to(out, t)
        return out

    __call__ = rhs

    def energy(self, q):
        return discrete_energy(q, self)

    def check_finite(self, q, step=None):
        check_finite(q, step)


def check_finite(q, step=None):
    """Raise NumericalInstability naming the first element with non-finite data."""
    bad = ~np.isfinite(q).all(axis=(0, 2))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        where = f" at step {step}" if step is not None else ""
        raise NumericalInstability(f"non-finite state in element {k}{where}", element=k, step=step)


def discrete_energy(q, op):
    """1/2 sum_k [(Qs^-1 Sigma, Sigma) + (rho V, V)] with exact element mass."""
    M = op.ops.Mhat
    J = op.geom.J
    sig = q[SIGMA]                                    # (6, K, Np)
    Msig = sig @ M                                    # M symmetric
    e_sigma = np.einsum("ikn,kij,jkn->k", Msig, op.Qs_inv, sig)
    v = q[VELOCITY]
    e_v = op.rho * np.einsum("ikn,ikn->k", v @ M, v)
    return 0.5 * float(np.sum(J * (e_sigma + e_v)))


def project(op, func, t=0.0):
    """Nodal interpolation of ``func(x, z, t) -> (8, K, Np)``."""
    return np.asarray(func(op.geom.x, op.geom.z, t), dtype=float).reshape(op.shape)


def element_block(q, k):
    """(Np, 8) view-like copy of all fields on element ``k``."""
    return q[:, k, :].T
