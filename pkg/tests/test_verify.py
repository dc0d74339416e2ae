import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import hankel2

from conftest import make_operator
from viscodg.materials import load_preset
from viscodg.sources import gauss_cosine_spectrum
from viscodg.verify import (assemble_global_operator, complex_velocities, dispersion_matrix,
                            greens_frequency, greens_trace, l2_error, operator_spectrum,
                            plane_wave_field, plane_wave_modes)


@pytest.mark.parametrize("name", ["sandstone", "sandstone_iso", "clay_shale"])
def test_dispersion_residual(name):
    mat = load_preset(name).rescaled()
    sol = plane_wave_modes(mat, 2 * np.pi * np.array([1.0, 1.0]) / np.sqrt(2))
    assert sol.residual() <= 1e-10
    assert abs(sol.omega[0].real) > abs(sol.omega[1].real) > 0


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 2 * np.pi), st.floats(0.5, 20.0))
def test_modes_satisfy_dispersion_any_direction(theta, kmag):
    mat = load_preset("sandstone_iso").rescaled()
    k = kmag * np.array([np.cos(theta), np.sin(theta)])
    sol = plane_wave_modes(mat, k)
    D = dispersion_matrix(sol.coeffs, sol.k)
    for l in range(2):
        r = sol.R[:, l]
        assert np.linalg.norm(D @ r - sol.omega[l] * r) <= 1e-10 * np.linalg.norm(r) * abs(sol.omega[l])


def test_elastic_plane_wave_speeds(sandstone):
    sol = plane_wave_modes(sandstone.elastic(), np.array([3.0, 4.0]))
    assert sol.omega[0].real / 5.0 == pytest.approx(np.sqrt(25.6 / 2.5))
    assert sol.omega[1].real / 5.0 == pytest.approx(np.sqrt(8.1 / 2.5))
    assert abs(sol.omega.imag).max() < 1e-10


def test_viscoelastic_plane_wave_decays(sandstone):
    sol = plane_wave_modes(sandstone, np.array([3.0, 4.0]))
    assert np.all(sol.omega.imag > 0)


def test_l2_error_of_exact_interpolant_is_small(sandstone):
    op = make_operator(sandstone, n=4, N=4)
    sol = plane_wave_modes(sandstone, np.array([2.0, 1.0]))
    f = lambda x, z, t: plane_wave_field(sol, x, z, t)      # noqa: E731
    assert l2_error(op, f(op.geom.x, op.geom.z, 0.3), f, 0.3) < 1e-4
    assert l2_error(op, 0 * op.zeros(), f, 0.3) == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_spectrum_left_half_plane(alpha):
    op = make_operator(load_preset("sandstone").rescaled(), n=2, N=2, alpha=alpha)
    s = operator_spectrum(op)
    assert s.normalized_max_real <= 1e-10


def test_elastic_central_spectrum_imaginary():
    op = make_operator(load_preset("sandstone").rescaled().elastic(), n=2, N=2, alpha=0.0,
                       bcs="free_surface")
    A = assemble_global_operator(op)
    keep = np.ones(op.shape, bool)
    keep[3:6] = False                     # memory rows only decay and never feed back
    keep = keep.ravel()
    assert np.abs(A[np.ix_(keep, ~keep)]).max() == 0.0
    ev = np.linalg.eigvals(A[np.ix_(keep, keep)])
    assert np.abs(ev.real).max() <= 1e-10 * np.abs(ev).max()


def test_spectrum_size_guard(sandstone):
    with pytest.raises(ValueError):
        operator_spectrum(make_operator(sandstone, n=4, N=3), max_unknowns=100)


# -- Green's function -----------------------------------------------------------


def tensor_green(mat, x, z, omega):
    """Independent 2D displacement Green's tensor column for a z force."""
    cp, cs = complex_velocities(mat, omega)
    mu = mat.rho * cs**2
    r = np.hypot(x, z)
    kp, ks = omega / cp, omega / cs

    def g(k):
        return -0.25j * hankel2(0, k * r)

    def dd(k):
        # second derivatives of g(k r)
        h0, h1 = hankel2(0, k * r), hankel2(1, k * r)
        gp = 0.25j * k * h1                     # dg/dr
        gpp = 0.25j * k * k * (h0 - h1 / (k * r))
        xx = gpp * x * x / r**2 + gp * (1 / r - x * x / r**3)
        xz = gpp * x * z / r**2 - gp * x * z / r**3
        zz = gpp * z * z / r**2 + gp * (1 / r - z * z / r**3)
        return xx, xz, zz

    dp, ds = dd(kp), dd(ks)
    fac = 1.0 / (mat.rho * omega**2)
    u1 = fac * (ds[1] - dp[1])
    u3 = g(ks) / mu + fac * (ds[2] - dp[2])
    return u1, u3


@pytest.mark.parametrize("elastic", [True, False])
def test_greens_frequency_matches_tensor_form(sandstone, elastic):
    mat = sandstone.elastic() if elastic else sandstone
    omega = 2 * np.pi * np.array([5.0, 45.0, 120.0])
    u1, u3 = greens_frequency(mat, (0.25, 0.25), omega)
    t1, t3 = tensor_green(mat, 0.25, 0.25, omega)
    assert np.allclose(u1, t1, rtol=1e-10)
    assert np.allclose(u3, t3, rtol=1e-10)


def test_greens_symmetries(sandstone):
    omega = np.array([-60.0, 0.0, 60.0])
    u1, u3 = greens_frequency(sandstone, (0.0, 0.3), omega)
    assert np.all(u1 == 0)
    assert u3[1] == 0
    assert u3[0] == pytest.approx(np.conj(u3[2]))
    v1, _ = greens_frequency(sandstone, (-0.2, 0.3), omega[2:])
    w1, _ = greens_frequency(sandstone, (0.2, 0.3), omega[2:])
    assert v1[0] == pytest.approx(-w1[0])
    with pytest.raises(ValueError):
        greens_frequency(sandstone, (0.0, 0.0), omega)


def test_navier_equation_residual(sandstone):
    """FD check of rho w^2 u + div(C grad u) = 0 away from the source."""
    mat = sandstone.elastic()
    w = 2 * np.pi * 30.0
    lam_mu = 25.6 - 2 * 8.1, 8.1
    h = 1e-3
    x0, z0 = 0.2, 0.15
    xs = x0 + h * np.arange(-2, 3)
    X, Z = np.meshgrid(xs, z0 + h * np.arange(-2, 3), indexing="ij")
    U1 = np.empty(X.shape, complex)
    U3 = np.empty(X.shape, complex)
    for i in range(5):
        for j in range(5):
            U1[i, j], U3[i, j] = (a[0] for a in greens_frequency(mat, (X[i, j], Z[i, j]), [w]))
    c = np.array([1, -8, 0, 8, -1]) / (12 * h)
    c2 = np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
    dxx = lambda U: c2 @ U[:, 2]                                 # noqa: E731
    dzz = lambda U: c2 @ U[2, :]                                 # noqa: E731
    dxz = lambda U: c @ (U @ c)                                  # noqa: E731
    lam, mu = lam_mu
    r1 = (lam + 2 * mu) * dxx(U1) + mu * dzz(U1) + (lam + mu) * dxz(U3) + mat.rho * w**2 * U1[2, 2]
    r3 = (lam + 2 * mu) * dzz(U3) + mu * dxx(U3) + (lam + mu) * dxz(U1) + mat.rho * w**2 * U3[2, 2]
    scale = mat.rho * w**2 * abs(U3[2, 2])
    assert abs(r1) < 1e-5 * scale and abs(r3) < 1e-5 * scale


def test_greens_trace_causal_and_parseval(sandstone):
    f0, t0 = 45.0, 0.05
    dt = 2e-4
    times = np.arange(1500) * dt
    spec = lambda w: gauss_cosine_spectrum(w, f0, t0)       # noqa: E731
    v1, v3 = greens_trace(sandstone, (0.25, 0.25), spec, times, f0)
    r = np.hypot(0.25, 0.25)
    arrival = r / np.sqrt(25.6 / 2.5)
    early = times < arrival + t0 - 6.0 / (np.pi * f0)
    peak = np.abs(v3).max()
    assert np.abs(v3[early]).max() < 1e-3 * peak
    assert np.abs(v1[early]).max() < 1e-3 * peak
    # Parseval on the synthesised record
    n = len(v3)
    V = np.fft.rfft(v3)
    e_f = (np.abs(V[0]) ** 2 + 2 * np.sum(np.abs(V[1:]) ** 2) - (np.abs(V[-1]) ** 2 if n % 2 == 0 else 0)) / n
    assert np.sum(v3**2) == pytest.approx(e_f, rel=1e-8)


def test_greens_trace_zero_wavelet_and_bad_grid(sandstone):
    times = np.arange(600) * 5e-4
    v1, v3 = greens_trace(sandstone, (0.2, 0.1), lambda w: 0 * w, times, 20.0)
    assert not v1.any() and not v3.any()
    with pytest.raises(ValueError):
        greens_trace(sandstone, (0.2, 0.1), lambda w: 0 * w, times[:10], 20.0)
    with pytest.raises(ValueError):
        greens_trace(sandstone, (0.2, 0.1), lambda w: 0 * w, times[1:], 20.0)


def test_velocity_forms(sandstone):
    w = np.array([2 * np.pi * 45])
    cp, cs = complex_velocities(sandstone.elastic(), w, "consistent")
    assert cp[0] == pytest.approx(np.sqrt(25.6 / 2.5))
    assert cs[0] == pytest.approx(np.sqrt(8.1 / 2.5))
    cp2, _ = complex_velocities(sandstone.elastic(), w, "sum_form")
    assert cp2[0] == pytest.approx(np.sqrt((25.6 * 2 + 25.6) / 2.5))
    with pytest.raises(ValueError):
        complex_velocities(sandstone, w, "other")
