"""Nodal basis and reference operators on the triangle (-1,-1), (1,-1), (-1,1).

Nodes are Warp & Blend points; all operators go through the orthonormal
(Dubiner) modal basis, so the mass matrix is ``(V V^T)^-1`` exactly.
"""

from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy.special import gammaln, roots_jacobi

NODETOL = 1e-10
MAX_ORDER = 8
REF_AREA = 2.0
REF_VERTICES = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
# faces: 0 = (v0, v1), 1 = (v1, v2), 2 = (v2, v0)
FACE_VERTICES = ((0, 1), (1, 2), (2, 0))
REF_FACE_LENGTH = np.array([2.0, 2.0 * sqrt(2.0), 2.0])
REF_NORMALS = np.array([[0.0, -1.0], [1.0 / sqrt(2.0), 1.0 / sqrt(2.0)], [-1.0, 0.0]])

# blend parameters optimised for Lebesgue constant, N = 1..15
_ALPHA_OPT = (0.0, 0.0, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832,
              1.3648, 1.4773, 1.4959, 1.5743, 1.5770, 1.6223, 1.6258)


def jacobi_p(x, alpha, beta, n):
    """Orthonormal Jacobi polynomial P_n^(alpha, beta) evaluated at x."""
    x = np.asarray(x, dtype=float)
    gamma0 = np.exp(
        (alpha + beta + 1) * np.log(2.0)
        + gammaln(alpha + 1) + gammaln(beta + 1) - gammaln(alpha + beta + 2)
    )
    p_prev = np.full_like(x, 1.0 / sqrt(gamma0))
    if n == 0:
        return p_prev
    gamma1 = (alpha + 1) * (beta + 1) / (alpha + beta + 3) * gamma0
    p = ((alpha + beta + 2) * x / 2 + (alpha - beta) / 2) / sqrt(gamma1)
    aold = 2 / (2 + alpha + beta) * sqrt((alpha + 1) * (beta + 1) / (alpha + beta + 3))
    for i in range(1, n):
        h1 = 2 * i + alpha + beta
        anew = 2 / (h1 + 2) * sqrt(
            (i + 1) * (i + 1 + alpha + beta) * (i + 1 + alpha) * (i + 1 + beta)
            / (h1 + 1) / (h1 + 3)
        )
        bnew = -(alpha**2 - beta**2) / h1 / (h1 + 2)
        p_prev, p = p, (-aold * p_prev + (x - bnew) * p) / anew
        aold = anew
    return p


def grad_jacobi_p(x, alpha, beta, n):
    if n == 0:
        return np.zeros_like(np.asarray(x, dtype=float))
    return sqrt(n * (n + alpha + beta + 1)) * jacobi_p(x, alpha + 1, beta + 1, n - 1)


def gauss_lobatto(n):
    """Legendre-Gauss-Lobatto points on [-1, 1] (n + 1 of them)."""
    if n == 1:
        return np.array([-1.0, 1.0])
    interior = roots_jacobi(n - 1, 1.0, 1.0)[0]
    return np.concatenate([[-1.0], interior, [1.0]])


def vandermonde_1d(n, x):
    return np.stack([jacobi_p(x, 0, 0, j) for j in range(n + 1)], axis=1)


def _warp_factor(n, rout):
    lgl = gauss_lobatto(n)
    req = np.linspace(-1.0, 1.0, n + 1)
    veq = vandermonde_1d(n, req)
    pmat = np.stack([jacobi_p(rout, 0, 0, i) for i in range(n + 1)])
    lmat = np.linalg.solve(veq.T, pmat)
    warp = lmat.T @ (lgl - req)
    interior = np.abs(rout) < 1.0 - 1e-10
    sf = 1.0 - (interior * rout) ** 2
    return warp / sf + warp * (interior - 1.0)


def warp_blend_nodes(n):
    """Warp & Blend nodes mapped to the reference triangle, shape (Np, 2)."""
    alpha = _ALPHA_OPT[n - 1] if n <= len(_ALPHA_OPT) else 5.0 / 3.0
    l1, l3 = [], []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            l1.append(i / n)
            l3.append(j / n)
    l1, l3 = np.array(l1), np.array(l3)
    l2 = 1.0 - l1 - l3
    x = -l2 + l3
    y = (-l2 - l3 + 2.0 * l1) / sqrt(3.0)
    blend = (4 * l2 * l3, 4 * l1 * l3, 4 * l1 * l2)
    factor = (_warp_factor(n, l3 - l2), _warp_factor(n, l1 - l3), _warp_factor(n, l2 - l1))
    lam = (l1, l2, l3)
    for k in range(3):
        w = blend[k] * factor[k] * (1.0 + (alpha * lam[k]) ** 2)
        x = x + np.cos(2 * np.pi * k / 3) * w
        y = y + np.sin(2 * np.pi * k / 3) * w
    # equilateral -> reference triangle
    b1 = (sqrt(3.0) * y + 1.0) / 3.0
    b2 = (-3.0 * x - sqrt(3.0) * y + 2.0) / 6.0
    b3 = (3.0 * x - sqrt(3.0) * y + 2.0) / 6.0
    return np.stack([-b2 + b3 - b1, -b2 - b3 + b1], axis=1)


def _rs_to_ab(r, s):
    a = np.where(np.abs(s - 1.0) > 1e-14, 2.0 * (1.0 + r) / (1.0 - s + 1e-300) - 1.0, -1.0)
    return a, s


def _modes(n):
    return [(i, j) for i in range(n + 1) for j in range(n + 1 - i)]


def simplex_p(r, s, i, j):
    a, b = _rs_to_ab(r, s)
    return sqrt(2.0) * jacobi_p(a, 0, 0, i) * jacobi_p(b, 2 * i + 1, 0, j) * (1 - b) ** i


def grad_simplex_p(r, s, i, j):
    a, b = _rs_to_ab(r, s)
    fa, dfa = jacobi_p(a, 0, 0, i), grad_jacobi_p(a, 0, 0, i)
    gb, dgb = jacobi_p(b, 2 * i + 1, 0, j), grad_jacobi_p(b, 2 * i + 1, 0, j)
    dr = dfa * gb
    if i > 0:
        dr = dr * (0.5 * (1 - b)) ** (i - 1)
    ds = dfa * (gb * (0.5 * (1 + a)))
    if i > 0:
        ds = ds * (0.5 * (1 - b)) ** (i - 1)
    tmp = dgb * (0.5 * (1 - b)) ** i
    if i > 0:
        tmp = tmp - 0.5 * i * gb * (0.5 * (1 - b)) ** (i - 1)
    ds = ds + fa * tmp
    return 2 ** (i + 0.5) * dr, 2 ** (i + 0.5) * ds


def vandermonde(n, points):
    """Modal basis values at ``points`` (M, 2): matrix of shape (M, Np)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r, s = points[:, 0], points[:, 1]
    return np.stack([simplex_p(r, s, i, j) for i, j in _modes(n)], axis=1)


def grad_vandermonde(n, points):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r, s = points[:, 0], points[:, 1]
    grads = [grad_simplex_p(r, s, i, j) for i, j in _modes(n)]
    return (np.stack([g[0] for g in grads], axis=1), np.stack([g[1] for g in grads], axis=1))


def triangle_quadrature(degree):
    """Collapsed Gauss rule exact for total degree ``degree``; returns (points, weights)."""
    m = degree // 2 + 1
    xa, wa = roots_jacobi(m, 0.0, 0.0)
    xb, wb = roots_jacobi(m, 1.0, 0.0)
    a, b = np.meshgrid(xa, xb, indexing="ij")
    w = np.outer(wa, wb) * 0.5
    r = 0.5 * (1 + a) * (1 - b) - 1.0
    return np.stack([r.ravel(), b.ravel()], axis=1), w.ravel()


def in_reference_triangle(points, tol=1e-10):
    p = np.atleast_2d(points)
    return (p[:, 0] >= -1 - tol) & (p[:, 1] >= -1 - tol) & (p[:, 0] + p[:, 1] <= tol)


@dataclass(frozen=True)
class ReferenceOperators:
    N: int
    Np: int
    Nfp: int
    nodes: np.ndarray
    V: np.ndarray
    Mhat: np.ndarray
    Mhat_inv: np.ndarray
    Dhat: tuple
    Shat: tuple
    Mf_hat: tuple
    Lhat: tuple
    face_nodes: np.ndarray
    lift: np.ndarray

    @property
    def r(self):
        return self.nodes[:, 0]

    @property
    def s(self):
        return self.nodes[:, 1]


def build_reference(n):
    """All reference-triangle operators for polynomial degree ``n``."""
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= MAX_ORDER):
        raise ValueError(f"polynomial degree must be an integer in 1..{MAX_ORDER}, got {n}")
    n = int(n)
    np_ = (n + 1) * (n + 2) // 2
    nfp = n + 1
    nodes = warp_blend_nodes(n)
    r, s = nodes[:, 0], nodes[:, 1]
    V = vandermonde(n, nodes)
    vinv = np.linalg.inv(V)
    Mhat = vinv.T @ vinv
    Mhat = 0.5 * (Mhat + Mhat.T)
    Mhat_inv = V @ V.T
    vr, vs = grad_vandermonde(n, nodes)
    Dr, Ds = vr @ vinv, vs @ vinv
    Sr, Ss = Mhat @ Dr, Mhat @ Ds

    face_params = (r, s, s)
    masks = (
        np.flatnonzero(np.abs(s + 1) < NODETOL),
        np.flatnonzero(np.abs(r + s) < NODETOL),
        np.flatnonzero(np.abs(r + 1) < NODETOL),
    )
    Mf, Lf = [], []
    for f, mask in enumerate(masks):
        if mask.size != nfp:
            raise RuntimeError(f"face {f}: found {mask.size} nodes, expected {nfp}")
        t = face_params[f][mask]
        v1 = vandermonde_1d(n, t)
        m1 = np.linalg.inv(v1 @ v1.T) * (REF_FACE_LENGTH[f] / 2.0)
        full = np.zeros((np_, np_))
        full[np.ix_(mask, mask)] = m1
        Mf.append(full)
        Lf.append(Mhat_inv @ full)
    face_nodes = np.stack(masks)
    lift = np.hstack([Lf[f][:, face_nodes[f]] for f in range(3)])

    arrays = [nodes, V, Mhat, Mhat_inv, Dr, Ds, Sr, Ss, face_nodes, lift, *Mf, *Lf]
    for a in arrays:
        a.setflags(write=False)
    return ReferenceOperators(
        N=n, Np=np_, Nfp=nfp, nodes=nodes, V=V, Mhat=Mhat, Mhat_inv=Mhat_inv,
        Dhat=(Dr, Ds), Shat=(Sr, Ss), Mf_hat=tuple(Mf), Lhat=tuple(Lf),
        face_nodes=face_nodes, lift=lift,
    )


def interpolation_matrix(ops, points):
    """Matrix mapping nodal values to values at reference ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not np.all(in_reference_triangle(points)):
        raise ValueError("interpolation point lies outside the reference triangle")
    return vandermonde(ops.N, points) @ np.linalg.inv(ops.V)


def interpolate(ops, values, point):
    """Evaluate the nodal expansion ``values`` (Np, ...) at one reference point."""
    row = interpolation_matrix(ops, point)[0]
    return np.tensordot(row, np.asarray(values), axes=(0, 0))
