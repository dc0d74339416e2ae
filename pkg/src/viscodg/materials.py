"""Anisotropic Zener materials and the symmetric 2D constitutive system.

A :class:`MaterialSpec` holds the raw inputs (unrelaxed stiffnesses, density,
one relaxation-time pair per mode).  :func:`derive_visco_coefficients` turns
it into everything the solver needs for the x1-x3 plane:

* the stress weight ``Qs_inv = diag(C2^-1, I)``,
* the pointwise source matrix ``S`` acting on ``[sigma11, sigma33, sigma13,
  a1, a2, a5]``.

Memory variables are carried in energy-scaled form so that ``S`` is
symmetric negative semi-definite for every admissible material, including the
elastic limit where the memory rows reduce to pure decay.  Conversion to the
physical strain-rate memory ``e = a + z(sigma)`` goes through
:func:`memory_from_state` and :func:`memory_to_physical`.

The solver itself is unit-agnostic; any consistent unit system works.  SI is
the default, :meth:`MaterialSpec.rescaled` produces the km / s / GPa / g/cm3
system used for the unit-square verification runs.
"""

from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .units import parse_quantity

# 2D memory components: dilatational (mode 1), deviatoric normal and 13-shear
# (both mode 2, one shear mechanism).
MEMORY_MODES = (0, 1, 1)
MEMORY_NAMES = ("a1", "a2", "a5")

# strain-rate projection: [tr, (e11 - e33)/2, gamma13] from [e11, e33, gamma13]
_P = np.array([[1.0, 1.0, 0.0], [0.5, -0.5, 0.0], [0.0, 0.0, 1.0]])


class MaterialError(ValueError):
    pass


@dataclass(frozen=True)
class MaterialSpec:
    """Raw material description.

    ``c`` is the full symmetric 6x6 Voigt stiffness of unrelaxed moduli,
    ``tau_eps``/``tau_sig`` hold the relaxation times of modes 1..4.
    """

    c: np.ndarray
    rho: float
    tau_eps: np.ndarray
    tau_sig: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.shape != (6, 6):
            raise MaterialError(f"stiffness must be 6x6, got {c.shape}")
        if not np.allclose(c, c.T, rtol=1e-12, atol=0.0):
            raise MaterialError("stiffness matrix is not symmetric")
        tau_eps = np.array(self.tau_eps, dtype=float).reshape(-1)
        tau_sig = np.array(self.tau_sig, dtype=float).reshape(-1)
        if tau_eps.shape != (4,) or tau_sig.shape != (4,):
            raise MaterialError("need four relaxation-time pairs")
        if not self.rho > 0:
            raise MaterialError(f"density must be positive, got {self.rho}")
        if np.any(tau_sig <= 0):
            raise MaterialError("tau_sig must be positive")
        if np.any(tau_eps < tau_sig):
            raise MaterialError("tau_eps must be >= tau_sig for every mode")
        normal = c[:3, :3]
        if np.any(np.linalg.eigvalsh(normal) <= 0):
            raise MaterialError("normal stiffness block is not positive definite")
        if np.any(np.diag(c)[3:] < 0):
            raise MaterialError("shear stiffnesses must be non-negative")
        c.setflags(write=False)
        tau_eps.setflags(write=False)
        tau_sig.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "tau_eps", tau_eps)
        object.__setattr__(self, "tau_sig", tau_sig)
        object.__setattr__(self, "rho", float(self.rho))

    @classmethod
    def from_entries(cls, rho, tau_eps, tau_sig, name="", **cij):
        """Build from named entries, e.g. ``c11=25.6e9, c13=9.4e9``."""
        c = np.zeros((6, 6))
        for key, value in cij.items():
            if len(key) != 3 or key[0] != "c":
                raise MaterialError(f"bad stiffness key {key!r}")
            i, j = int(key[1]) - 1, int(key[2]) - 1
            c[i, j] = c[j, i] = value
        return cls(c=c, rho=rho, tau_eps=tau_eps, tau_sig=tau_sig, name=name)

    def cij(self, i, j):
        return self.c[i - 1, j - 1]

    @property
    def stiffness_2d(self):
        """Unrelaxed stiffness acting on ``[e11, e33, gamma13]``."""
        c = self.c
        return np.array(
            [[c[0, 0], c[0, 2], 0.0], [c[0, 2], c[2, 2], 0.0], [0.0, 0.0, c[4, 4]]]
        )

    @property
    def is_elastic(self):
        return bool(np.all(self.tau_eps == self.tau_sig))

    def elastic(self):
        """Same medium with every mode at the elastic limit."""
        return replace(self, tau_eps=self.tau_sig.copy(), name=self.name + "+elastic")

    def rescaled(self, stress_unit=1e9, density_unit=1e3):
        """Express moduli and density in other units (default GPa, g/cm3).

        With GPa and g/cm3 speeds come out in km/s, so lengths are in km and
        times stay in seconds.
        """
        return replace(self, c=self.c / stress_unit, rho=self.rho / density_unit)


def _read_key_values(text, source="<string>"):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MaterialError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise MaterialError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = (value, lineno)
    return out


_STIFF_KEYS = {f"c{i}{j}" for i in range(1, 7) for j in range(i, 7)}


def parse_material(text, source="<string>"):
    """Parse a material file.

    Scalars need unit suffixes (``c11 = 25.6 GPa``, ``tau_eps1 = 3.72 ms``).
    Modes 3 and 4 default to mode 2 when absent.
    """
    kv = _read_key_values(text, source)
    name = kv.pop("name", ("", 0))[0]
    entries, taus = {}, {}
    rho = None
    for key, (value, lineno) in kv.items():
        try:
            if key in _STIFF_KEYS:
                entries[key] = parse_quantity(value)
            elif key == "rho":
                rho = parse_quantity(value)
            elif key[:-1] in ("tau_eps", "tau_sig") and key[-1] in "1234":
                taus[key] = parse_quantity(value)
            else:
                raise MaterialError(f"unknown key {key!r}")
        except ValueError as exc:
            raise MaterialError(f"{source}:{lineno}: {exc}") from None
    if rho is None:
        raise MaterialError(f"{source}: missing rho")
    tau_eps, tau_sig = [], []
    for nu in range(1, 5):
        fallback = 2 if nu > 2 else None
        for kind, out in (("tau_eps", tau_eps), ("tau_sig", tau_sig)):
            key = f"{kind}{nu}"
            if key in taus:
                out.append(taus[key])
            elif fallback and f"{kind}{fallback}" in taus:
                out.append(taus[f"{kind}{fallback}"])
            else:
                raise MaterialError(f"{source}: missing {key}")
    return MaterialSpec.from_entries(rho, tau_eps, tau_sig, name=name, **entries)


PRESETS = ("clay_shale", "phenolic", "sandstone", "sandstone_iso")


def load_preset(name):
    """Load one of the shipped material files by name."""
    if name not in PRESETS:
        raise MaterialError(f"unknown preset {name!r}; choose from {PRESETS}")
    text = resources.files("viscodg.data").joinpath(f"{name}.mat").read_text()
    return parse_material(text, source=f"{name}.mat")


def load_material(name_or_path):
    if name_or_path in PRESETS:
        return load_preset(name_or_path)
    with open(name_or_path) as fh:
        return parse_material(fh.read(), source=str(name_or_path))


# -- scalar moduli ----------------------------------------------------------


def derive_moduli(spec):
    """Return ``(K, G, D)``: bulk-like, shear and mean normal moduli."""
    c = spec.c
    D = (c[0, 0] + c[1, 1] + c[2, 2]) / 3.0
    G = (c[3, 3] + c[4, 4] + c[5, 5]) / 3.0
    return D - 4.0 * G / 3.0, G, D


def compliance_inverse(spec):
    """Entries ``r11, r12, r13, r33`` of the inverted normal stiffness block."""
    block = spec.c[:3, :3]
    cond = np.linalg.cond(block)
    if not np.isfinite(cond) or cond > 1e12:
        raise MaterialError(f"normal stiffness block is singular (cond={cond:.3e})")
    r = np.linalg.inv(block)
    return {"r11": r[0, 0], "r12": r[0, 1], "r13": r[0, 2], "r33": r[2, 2]}


# -- relaxation functions ---------------------------------------------------


@dataclass(frozen=True)
class RelaxationModel:
    """Single-mechanism Zener relaxation for modes 1..4.

    Normalised so the unrelaxed limit is 1: ``chi(0+) = 1`` and
    ``M(omega -> inf) = 1``, with the relaxed value ``tau_sig/tau_eps``.
    """

    tau_eps: np.ndarray
    tau_sig: np.ndarray

    @classmethod
    def of(cls, spec):
        return cls(spec.tau_eps, spec.tau_sig)

    def _taus(self, nu):
        return self.tau_eps[nu - 1], self.tau_sig[nu - 1]

    def chi(self, nu, t):
        te, ts = self._taus(nu)
        t = np.asarray(t, dtype=float)
        val = (ts / te) * (1.0 - (1.0 - te / ts) * np.exp(-np.maximum(t, 0.0) / ts))
        return np.where(t < 0, 0.0, val)

    def kernel(self, nu, t):
        """Memory kernel ``d chi/dt`` for t >= 0 (zero for t < 0)."""
        te, ts = self._taus(nu)
        t = np.asarray(t, dtype=float)
        val = (1.0 / te - 1.0 / ts) * np.exp(-np.maximum(t, 0.0) / ts)
        return np.where(t < 0, 0.0, val)

    def complex_modulus(self, nu, omega):
        te, ts = self._taus(nu)
        omega = np.asarray(omega, dtype=float)
        return (ts / te) * (1.0 + 1j * omega * te) / (1.0 + 1j * omega * ts)


def relaxation_chi(spec, nu, t):
    return RelaxationModel.of(spec).chi(nu, t)


def complex_modulus(spec, nu, omega):
    return RelaxationModel.of(spec).complex_modulus(nu, omega)


# -- derived coefficients ---------------------------------------------------


@dataclass(frozen=True)
class ViscoCoefficients:
    K: float
    G: float
    D: float
    r: dict
    T: np.ndarray
    d1: float
    d2: float
    p_lambda: float
    p_mu1: float
    p_mu2: float
    w: np.ndarray
    rho: float
    C2: np.ndarray
    C2_inv: np.ndarray
    z_rows: np.ndarray
    memory_gain: np.ndarray
    Qs_inv: np.ndarray
    Qs: np.ndarray
    S: np.ndarray
    relax_rates: np.ndarray = field(repr=False)


def _sym_sqrt(a):
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    return (vecs * np.sqrt(vals)) @ vecs.T


def derive_visco_coefficients(spec):
    """Assemble all derived coefficients for the 2D solver.

    With unrelaxed 2D stiffness ``C``, modal moduli ``Dm = (K, 4G, c55)``,
    factors ``T = 1/tau_eps - 1/tau_sig`` and rates ``L = 1/tau_sig`` the
    constitutive law is

        sigma' = C eps' + P^T Dm e,    e' = T P eps' - L e.

    The strain-history memory ``xi`` (``e = xi'``) has the stored energy
    ``xi^T H xi`` with ``H = -Dm L / T - (P^T Dm)^T C^-1 (P^T Dm)``; the state
    keeps ``eta = Hs^(1/2) g^-1 xi`` with ``g = sqrt(-T/Dm)`` so that the
    local source is ``S = -[N, Hs^(1/2)]^T [N, Hs^(1/2)]`` with
    ``N = sqrt(-T Dm) P C^-1`` and ``Hs = L - N C N^T``.
    """
    K, G, D = derive_moduli(spec)
    r = compliance_inverse(spec)
    T = 1.0 / spec.tau_eps - 1.0 / spec.tau_sig

    # coefficient algebra of the 3D system (one shear mechanism, kept for reference)
    d1 = r["r11"] + r["r12"] + r["r13"]
    d2 = r["r33"] + 2.0 * r["r13"]
    p_lambda = K * (2.0 * d1 + d2)
    p_mu1 = G * (d1 - 2.0 * d2)
    p_mu2 = 2.0 * G * (d1 - d2)
    ts = spec.tau_sig
    w = np.array(
        [
            T[0] * p_lambda + 1.0 / ts[0],
            T[0] * p_mu1,
            T[0] * p_mu2,
            T[1] * p_lambda / 3.0 - 1.0 / ts[1] - K * (r["r11"] + r["r12"]),
            T[1] * p_mu1 - G * (r["r11"] - r["r13"]),
            T[1] * p_mu2 - G * (r["r12"] - r["r13"]),
            T[2] * p_lambda / 3.0 - 1.0 / ts[2] - K * (r["r12"] + r["r11"]),
            T[2] * p_mu1 - G * (r["r12"] - r["r13"]),
            T[2] * p_mu2 - G * (r["r11"] - r["r13"]),
        ]
    )

    modes = list(MEMORY_MODES)
    Tm = T[modes]
    Lm = 1.0 / ts[modes]
    Dm = np.array([K, 4.0 * G, spec.c[4, 4]])
    active = (Tm != 0) & (Dm != 0)
    if np.any(Dm[Tm != 0] < 0):
        raise MaterialError("negative modal modulus with active relaxation")

    C2 = spec.stiffness_2d
    if np.any(np.linalg.eigvalsh(C2) <= 0):
        raise MaterialError("2D stiffness block is not positive definite")
    C2_inv = np.linalg.inv(C2)
    C2_inv = 0.5 * (C2_inv + C2_inv.T)

    s = np.sqrt(np.where(active, -Tm * Dm, 0.0))
    N = s[:, None] * (_P @ C2_inv)
    Hs = np.diag(Lm) - N @ C2 @ N.T
    Hs = 0.5 * (Hs + Hs.T)
    if np.any(np.linalg.eigvalsh(Hs) <= 0):
        raise MaterialError(
            "relaxed moduli are not positive: memory energy is indefinite"
        )
    Hs_half = _sym_sqrt(Hs)

    coupling = np.hstack([N, Hs_half])
    S = -coupling.T @ coupling

    g = np.where(active, s / np.where(Dm != 0, Dm, 1.0), 0.0)
    z_rows = Tm[:, None] * (_P @ C2_inv)
    memory_gain = -g[:, None] * Hs_half

    Qs_inv = np.zeros((6, 6))
    Qs_inv[:3, :3] = C2_inv
    Qs_inv[3:, 3:] = np.eye(3)
    Qs = np.zeros((6, 6))
    Qs[:3, :3] = C2
    Qs[3:, 3:] = np.eye(3)

    out = ViscoCoefficients(
        K=K, G=G, D=D, r=r, T=T, d1=d1, d2=d2,
        p_lambda=p_lambda, p_mu1=p_mu1, p_mu2=p_mu2, w=w,
        rho=spec.rho, C2=C2, C2_inv=C2_inv, z_rows=z_rows,
        memory_gain=memory_gain, Qs_inv=Qs_inv, Qs=Qs, S=S,
        relax_rates=Lm,
    )
    for arr in (T, w, C2, C2_inv, z_rows, memory_gain, Qs_inv, Qs, S, Lm):
        arr.setflags(write=False)
    return out


def memory_from_state(eta, coeffs):
    """Map energy-scaled state memory to ``a = e - z(sigma)``."""
    return np.asarray(eta) @ coeffs.memory_gain.T


def memory_to_physical(a, sigma, coeffs):
    """Strain-rate memory ``e = a + z(sigma)``; arrays end in a 3-axis."""
    return np.asarray(a) + np.asarray(sigma) @ coeffs.z_rows.T


def christoffel_speeds(spec, direction):
    """Unrelaxed (qP, qS) phase speeds along a unit direction in x1-x3."""
    n1, n3 = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
    c = spec.c
    gamma = np.array(
        [
            [c[0, 0] * n1**2 + c[4, 4] * n3**2, (c[0, 2] + c[4, 4]) * n1 * n3],
            [(c[0, 2] + c[4, 4]) * n1 * n3, c[4, 4] * n1**2 + c[2, 2] * n3**2],
        ]
    )
    vals = np.linalg.eigvalsh(gamma / spec.rho)
    return tuple(np.sqrt(np.maximum(vals, 0.0))[::-1])


def characteristic_speeds(spec):
    """Largest unrelaxed phase speed over the x, z and diagonal directions."""
    dirs = ((1.0, 0.0), (0.0, 1.0), (1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)))
    return max(christoffel_speeds(spec, d)[0] for d in dirs)
