"""Source wavelets, point-source injection and receiver recording."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .dg_core import FIELDS
from .mesh2d import locate
from .refelem import interpolation_matrix

SOURCE_TARGETS = ("v1", "v3", "s11", "s33", "s13")
WAVELETS = ("ricker", "gauss_cosine")


def ricker(t, f0, t0):
    a = (np.pi * f0 * (np.asarray(t, dtype=float) - t0)) ** 2
    return (1.0 - 2.0 * a) * np.exp(-a)


def gauss_cosine(t, f0, t0):
    """exp(-dw^2 (t - t0)^2 / 4) cos(w (t - t0)) with w = 2 pi f0, dw = w / 2."""
    w = 2 * np.pi * f0
    dw = 0.5 * w
    tau = np.asarray(t, dtype=float) - t0
    return np.exp(-(dw * tau) ** 2 / 4.0) * np.cos(w * tau)


def gauss_cosine_spectrum(omega, f0, t0):
    """Exact Fourier transform (kernel exp(-i omega t)) of :func:`gauss_cosine`."""
    w = 2 * np.pi * f0
    dw = 0.5 * w
    omega = np.asarray(omega, dtype=float)
    env = np.exp(-(((omega - w) / dw) ** 2)) + np.exp(-(((omega + w) / dw) ** 2))
    return np.sqrt(np.pi) / dw * env * np.exp(-1j * omega * t0)


@dataclass(frozen=True)
class SourceSpec:
    kind: str
    f0: float
    t0: float
    position: tuple
    amplitude: float = 1.0
    targets: dict = field(default_factory=lambda: {"v3": 1.0})

    def __post_init__(self):
        if self.kind not in WAVELETS:
            raise ValueError(f"unknown wavelet {self.kind!r}; expected one of {WAVELETS}")
        if not self.f0 > 0:
            raise ValueError("f0 must be positive")
        bad = set(self.targets) - set(SOURCE_TARGETS)
        if bad or not self.targets:
            raise ValueError(f"source targets must be a non-empty subset of {SOURCE_TARGETS}")

    def wavelet(self, t):
        fn = ricker if self.kind == "ricker" else gauss_cosine
        return self.amplitude * fn(t, self.f0, self.t0)

    def spectrum(self, omega):
        if self.kind != "gauss_cosine":
            raise ValueError("an analytic spectrum is provided for gauss_cosine only")
        return self.amplitude * gauss_cosine_spectrum(omega, self.f0, self.t0)


class PointSource:
    """Delta at ``position`` projected with the element inverse mass.

    For any polynomial p, the element mass-weighted integral of the injected
    nodal field against p equals ``wavelet(t) * p(position)``.  Velocity
    targets are divided by the owning element's density, stress targets are
    added to the stress rate directly.
    """

    def __init__(self, spec, op):
        self.spec = spec
        elem, ref = locate(op.mesh, [spec.position])
        self.element = int(elem[0])
        phi = interpolation_matrix(op.ops, ref)[0]
        self.profile = op.ops.Mhat_inv @ phi / op.geom.J[self.element]
        rho = op.rho[self.element]
        self.weights = np.zeros(len(FIELDS))
        for name, w in spec.targets.items():
            i = FIELDS.index(name)
            self.weights[i] = w / rho if name.startswith("v") else w
        self._rows = np.outer(self.weights, self.profile)          # (8, Np)

    def add_to(self, out, t):
        w = self.spec.wavelet(t)
        if w != 0.0:
            out[:, self.element, :] += w * self._rows


class ReceiverSet:
    """Point receivers sampling the nodal expansion of selected fields."""

    def __init__(self, op, positions, fields=("v1", "v3")):
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        self.positions = positions
        self.fields = tuple(fields)
        self.index = [FIELDS.index(f) for f in self.fields]
        self.elements, self.ref = locate(op.mesh, positions)
        self.interp = interpolation_matrix(op.ops, self.ref)   # (nrec, Np)
        self.times = []
        self.samples = []

    def sample(self, q):
        vals = np.einsum("rn,frn->rf", self.interp, q[:, self.elements, :])
        return vals[:, self.index]

    def record(self, q, t):
        self.times.append(float(t))
        self.samples.append(self.sample(q))

    def traces(self):
        """(times, array of shape (nrec, nt, nfields))."""
        if not self.samples:
            return np.zeros(0), np.zeros((len(self.positions), 0, len(self.fields)))
        return np.array(self.times), np.stack(self.samples, axis=1)

    def write_csv(self, directory, prefix="receiver"):
        times, data = self.traces()
        paths = []
        for r in range(len(self.positions)):
            path = f"{directory}/{prefix}_{r:03d}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(("t",) + self.fields)
                for i, t in enumerate(times):
                    w.writerow([repr(float(t))] + [repr(float(v)) for v in data[r, i]])
            paths.append(path)
        return paths


def record(receivers, q, t):
    receivers.record(q, t)
