import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from viscodg.materials import (PRESETS, MaterialError, MaterialSpec, RelaxationModel,
                               characteristic_speeds, christoffel_speeds, compliance_inverse,
                               complex_modulus, derive_visco_coefficients, load_preset,
                               parse_material, relaxation_chi)


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    m = load_preset(name)
    assert m.rho > 0 and m.c.shape == (6, 6)


def test_sandstone_table_values():
    m = load_preset("sandstone")
    assert m.c[0, 0] == pytest.approx(25.6e9)
    assert m.rho == pytest.approx(2500.0)


def test_unknown_preset():
    with pytest.raises(MaterialError):
        load_preset("granite")


def test_parse_errors_carry_line_numbers():
    text = "rho = 2.5 g/cm3\nc11 = 25.6 GPa\nfoo = 3\n"
    with pytest.raises(MaterialError, match=":3:"):
        parse_material(text)


def test_rejects_tau_eps_below_tau_sig():
    c = np.diag([10.0, 10, 10, 3, 3, 3])
    with pytest.raises(MaterialError):
        MaterialSpec(c, 1.0, [1, 1, 1, 1], [2, 1, 1, 1])


@pytest.mark.parametrize("name", PRESETS)
def test_compliance_inverse_matches_generic_inverse(name):
    m = load_preset(name)
    r = compliance_inverse(m)
    inv = np.linalg.inv(m.c[:3, :3])
    for key, (i, j) in {"r11": (0, 0), "r12": (0, 1), "r13": (0, 2), "r33": (2, 2)}.items():
        assert r[key] == pytest.approx(inv[i, j], rel=1e-12)


def test_relaxation_limits():
    m = load_preset("sandstone")
    relax = RelaxationModel.of(m)
    for nu in (1, 2):
        assert relax.chi(nu, 0.0) == pytest.approx(1.0)
        ratio = m.tau_sig[nu - 1] / m.tau_eps[nu - 1]
        assert relax.chi(nu, 100 * m.tau_sig[nu - 1]) == pytest.approx(ratio, rel=1e-12)
        assert complex_modulus(m, nu, 1e12) == pytest.approx(1.0, rel=1e-6)
        assert relaxation_chi(m, nu, -1.0) == 0.0


def test_complex_modulus_is_transform_of_kernel():
    m = load_preset("sandstone")
    relax = RelaxationModel.of(m)
    for omega in (2 * np.pi * 5, 2 * np.pi * 45, 2 * np.pi * 300):
        re = quad(lambda t: relax.kernel(1, t) * np.cos(omega * t), 0, 1.0, limit=400)[0]
        im = quad(lambda t: -relax.kernel(1, t) * np.sin(omega * t), 0, 1.0, limit=400)[0]
        assert abs(1.0 + re + 1j * im - relax.complex_modulus(1, omega)) < 1e-6


@pytest.mark.parametrize("name", PRESETS)
def test_source_matrix_symmetric_negative(name):
    c = derive_visco_coefficients(load_preset(name).rescaled())
    assert np.allclose(c.S, c.S.T, atol=1e-12 * np.abs(c.S).max())
    assert np.linalg.eigvalsh(c.S).max() <= 1e-10 * np.abs(c.S).max()
    assert np.allclose(c.Qs_inv @ c.Qs, np.eye(6), atol=1e-12)


def test_elastic_limit_decouples_memory():
    c = derive_visco_coefficients(load_preset("sandstone").rescaled().elastic())
    assert np.allclose(c.S[:3], 0.0)
    assert np.allclose(c.S[:, :3], 0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(1.0, 1.5), st.floats(0.1, 2.0))
def test_symmetric_nsd_for_random_isotropic(ratio, stretch, shear):
    lam = 10.0 * ratio
    c = np.zeros((6, 6))
    c[:3, :3] = lam
    c[np.arange(3), np.arange(3)] = lam + 2 * shear
    c[3:, 3:] = np.eye(3) * shear
    ts = np.full(4, 1e-3)
    m = MaterialSpec(c, 2.0, ts * stretch, ts)
    S = derive_visco_coefficients(m).S
    assert np.linalg.eigvalsh(0.5 * (S + S.T)).max() <= 1e-9 * max(1.0, np.abs(S).max())


def test_speeds_isotropic(sandstone):
    cp, cs = christoffel_speeds(sandstone, (1.0, 0.0))
    assert cp == pytest.approx(np.sqrt(25.6 / 2.5))
    assert cs == pytest.approx(np.sqrt(8.1 / 2.5))
    assert characteristic_speeds(sandstone) == pytest.approx(cp)
