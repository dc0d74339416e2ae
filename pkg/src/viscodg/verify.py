"""Analytic oracles and stability diagnostics.

* plane-wave eigenmodes of the local 8x8 system and their superposition,
* dense assembly of the semi-discrete operator and its spectrum,
* the 2D point-force Green's function in a homogeneous isotropic
  viscoelastic medium (correspondence principle) and its time synthesis.

Frequency-domain quantities use the ``exp(i omega t)`` time dependence, so
forward transforms are ``F(omega) = int f(t) exp(-i omega t) dt``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import hankel2

from .dg_core import A1, A3, ExactBoundary, SIGMA, VELOCITY
from .materials import RelaxationModel, derive_visco_coefficients
from .refelem import interpolation_matrix, triangle_quadrature

MAX_DENSE_UNKNOWNS = 20000


# -- plane waves --------------------------------------------------------------


def local_matrices(coeffs):
    """(Mx, Mz, L) with q_t = Mx q_x + Mz q_z + L q for the 8-field state."""
    Mx = np.zeros((8, 8))
    Mz = np.zeros((8, 8))
    L = np.zeros((8, 8))
    Qs = coeffs.Qs
    Mx[SIGMA, VELOCITY] = Qs @ A1
    Mz[SIGMA, VELOCITY] = Qs @ A3
    Mx[VELOCITY, SIGMA] = A1.T / coeffs.rho
    Mz[VELOCITY, SIGMA] = A3.T / coeffs.rho
    L[SIGMA, SIGMA] = Qs @ coeffs.S
    return Mx, Mz, L


def dispersion_matrix(coeffs, k):
    """Matrix whose eigenpairs give omega for q0 exp(i(omega t - k.x))."""
    Mx, Mz, L = local_matrices(coeffs)
    return -k[0] * Mx - k[1] * Mz - 1j * L


@dataclass(frozen=True)
class PlaneWaveSolution:
    """Two-mode plane wave; column ``l`` of ``R`` already includes its amplitude."""

    k: np.ndarray
    omega: np.ndarray   # (2,) complex: [qP, qS]
    R: np.ndarray       # (8, 2) complex
    coeffs: object

    @property
    def q0(self):
        return self.R.sum(axis=1)

    def residual(self):
        A = dispersion_matrix(self.coeffs, self.k)
        res = A @ self.R - self.R * self.omega[None, :]
        return np.linalg.norm(res) / np.linalg.norm(self.R)


def plane_wave_modes(material, k, _retry=True):
    """Quasi-P and quasi-S modes travelling along ``k``.

    Modes are the two eigenpairs with Re omega > 0 and largest |Re omega|.
    The P eigenvector is scaled so that v.k_hat = 1, the S eigenvector so
    that v.k_perp = 1 with k_perp = (-k_z, k_x)/|k|.
    """
    k = np.asarray(k, dtype=float)
    kn = np.linalg.norm(k)
    if not kn > 0:
        raise ValueError("wave vector must be nonzero")
    coeffs = derive_visco_coefficients(material)
    w, V = np.linalg.eig(dispersion_matrix(coeffs, k))
    fwd = np.flatnonzero(w.real > 1e-12 * kn * np.abs(w).max())
    if fwd.size < 2:
        raise ValueError("medium supports fewer than two propagating modes along k")
    order = fwd[np.argsort(-w[fwd].real)][:2]
    omega, R = w[order], V[:, order]
    if np.isclose(omega[0].real, omega[1].real, rtol=1e-8):
        raise ValueError("degenerate P/S speeds along k; mode labelling is ambiguous")
    if np.linalg.cond(R) > 1e10:
        if not _retry:
            raise ValueError("defective eigenproblem for plane-wave modes")
        return plane_wave_modes(material, k * (1 + 1e-12), _retry=False)
    khat = k / kn
    kperp = np.array([-khat[1], khat[0]])
    for col, d in enumerate((khat, kperp)):
        proj = R[6:, col] @ d
        if abs(proj) < 1e-12 * np.abs(R[6:, col]).max():
            d = R[6:, col] / np.linalg.norm(R[6:, col])
            proj = R[6:, col] @ d.conj()
        R[:, col] = R[:, col] / proj
    return PlaneWaveSolution(k=k, omega=omega, R=R, coeffs=coeffs)


def plane_wave_field(sol, x, z, t):
    """Real field (8, ...) of the superposed modes at points (x, z) and time t."""
    x, z = np.asarray(x, dtype=float), np.asarray(z, dtype=float)
    phase = 1j * (sol.omega[:, None] * t - (sol.k[0] * x.ravel()[None, :] + sol.k[1] * z.ravel()[None, :]))
    q = sol.R @ np.exp(phase)
    return q.real.reshape((8,) + x.shape)


def plane_wave_boundary(sol):
    return ExactBoundary(lambda x, z, t: plane_wave_field(sol, x, z, t))


def l2_error(op, q, exact, t, degree=None):
    """Relative L2 error over all eight fields against ``exact(x, z, t)``.

    Uses a collapsed-Gauss rule of total degree ``2N + 2`` by default.
    """
    ops, g = op.ops, op.geom
    pts, wts = triangle_quadrature(2 * ops.N + 2 if degree is None else degree)
    I = interpolation_matrix(ops, pts)
    qh = q @ I.T                                       # (8, K, nq)
    r, s = pts[:, 0], pts[:, 1]
    v = op.mesh.vertices[op.mesh.triangles]
    xq = 0.5 * (-(r + s)[None] * v[:, 0, 0, None] + (1 + r)[None] * v[:, 1, 0, None] + (1 + s)[None] * v[:, 2, 0, None])
    zq = 0.5 * (-(r + s)[None] * v[:, 0, 1, None] + (1 + r)[None] * v[:, 1, 1, None] + (1 + s)[None] * v[:, 2, 1, None])
    qe = exact(xq, zq, t)
    w = g.J[:, None] * wts[None, :]
    err = np.sum(w * (qh - qe) ** 2)
    ref = np.sum(w * qe**2)
    return float(np.sqrt(err / ref))


# -- operator spectrum ---------------------------------------------------------


def assemble_global_operator(op, max_unknowns=MAX_DENSE_UNKNOWNS):
    """Dense matrix of the (linear, source-free) semi-discrete operator."""
    n = int(np.prod(op.shape))
    if n > max_unknowns:
        raise ValueError(f"{n} unknowns exceeds the dense assembly limit {max_unknowns}")
    if op.sources or any(isinstance(bc, ExactBoundary) for bc in op.bcs.values()):
        raise ValueError("operator must be linear: remove sources and exact boundaries")
    A = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        A[:, j] = op.rhs(e.reshape(op.shape)).ravel()
        e[j] = 0.0
    return A


@dataclass(frozen=True)
class SpectrumSummary:
    eigenvalues: np.ndarray
    max_real: float
    spectral_radius: float

    @property
    def normalized_max_real(self):
        return self.max_real / self.spectral_radius


def operator_spectrum(op, max_unknowns=MAX_DENSE_UNKNOWNS):
    ev = np.linalg.eigvals(assemble_global_operator(op, max_unknowns))
    return SpectrumSummary(ev, float(ev.real.max()), float(np.abs(ev).max()))


# -- Green's function ------------------------------------------------------------


def complex_velocities(material, omega, form="consistent"):
    """Complex P and S velocities from the correspondence principle.

    ``consistent`` uses the moduli the solver actually integrates:
    P modulus ``c11 + K (M1 - 1) + G (M2 - 1)``, S modulus ``c55 M2``.
    ``sum_form`` uses ``((c11 + c33) M1 + c33 M2)`` and ``c33 M2``.
    """
    relax = RelaxationModel.of(material)
    M1 = relax.complex_modulus(1, omega)
    M2 = relax.complex_modulus(2, omega)
    c = material.c
    if form == "consistent":
        coeffs = derive_visco_coefficients(material)
        mod_p = c[0, 0] + coeffs.K * (M1 - 1.0) + coeffs.G * (M2 - 1.0)
        mod_s = c[4, 4] * M2
    elif form == "sum_form":
        mod_p = (c[0, 0] + c[2, 2]) * M1 + c[2, 2] * M2
        mod_s = c[2, 2] * M2
    else:
        raise ValueError(f"unknown velocity form {form!r}")
    return np.sqrt(mod_p / material.rho + 0j), np.sqrt(mod_s / material.rho + 0j)


def greens_frequency(material, receiver, omega, force=1.0, form="consistent"):
    """Displacement spectra (u1, u3) at ``receiver`` for a unit-spectrum z force.

    The source sits at the origin.  ``omega = 0`` samples are returned as
    zero.  Negative frequencies follow from conjugate symmetry.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    x, z = map(float, receiver)
    r = np.hypot(x, z)
    if r == 0:
        raise ValueError("receiver must not coincide with the source")
    u1 = np.zeros(omega.shape, dtype=complex)
    u3 = np.zeros(omega.shape, dtype=complex)
    pos = omega > 0
    neg = omega < 0
    for mask, sign in ((pos, 1.0), (neg, -1.0)):
        if not np.any(mask):
            continue
        w = sign * omega[mask]
        cp, cs = complex_velocities(material, w, form)
        hp0, hp1 = hankel2(0, w * r / cp), hankel2(1, w * r / cp)
        hs0, hs1 = hankel2(0, w * r / cs), hankel2(1, w * r / cs)
        g1 = -0.5j * np.pi * (hp0 / cp**2 + hs1 / (w * r * cs) - hp1 / (w * r * cp))
        g3 = 0.5j * np.pi * (hs0 / cs**2 - hs1 / (w * r * cs) + hp1 / (w * r * cp))
        pre = force / (2 * np.pi * material.rho * r**2)
        a1 = pre * x * z * (g1 + g3)
        a3 = pre * (z * z * g1 - x * x * g3)
        if sign < 0:
            a1, a3 = np.conj(a1), np.conj(a3)
        u1[mask], u3[mask] = a1, a3
    return u1, u3


def greens_trace(material, receiver, spectrum, times, f0, form="consistent", pad=2.0):
    """Particle-velocity traces (v1, v3) for a source with spectrum ``spectrum(omega)``.

    ``times`` must be a uniform grid starting at 0.  The synthesis grid has
    ``df = 1 / (pad * t_max)`` and stops at ``8 f0``; a cosine taper covers
    the top tenth of that band.
    """
    times = np.asarray(times, dtype=float)
    dt = times[1] - times[0]
    if abs(times[0]) > 1e-12 * dt or not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0):
        raise ValueError("times must be a uniform grid starting at 0")
    t_max = times[-1]
    if t_max * f0 < 2.0:
        raise ValueError("time grid too short for the wavelet support")
    if 8 * f0 * 2 * dt > 1.0:
        raise ValueError("time step too coarse for the synthesis band")
    n = int(np.ceil(pad * t_max / dt)) + 1
    freqs = np.fft.rfftfreq(n, dt)
    omega = 2 * np.pi * freqs
    fmax = 8 * f0
    band = freqs <= fmax
    taper = np.zeros_like(freqs)
    taper[band] = 1.0
    edge = band & (freqs > 0.9 * fmax)
    taper[edge] = 0.5 * (1 + np.cos(np.pi * (freqs[edge] - 0.9 * fmax) / (0.1 * fmax)))
    u1, u3 = greens_frequency(material, receiver, omega[band], form=form)
    src = spectrum(omega[band])
    out = []
    for u in (u1, u3):
        V = np.zeros(freqs.shape, dtype=complex)
        V[band] = 1j * omega[band] * u * src * taper[band]
        out.append(np.fft.irfft(V, n) / dt)
    m = len(times)
    return out[0][:m], out[1][:m]
