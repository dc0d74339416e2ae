"""The four run types: simulate, convergence, spectrum and greens-compare.

Configurations are in SI.  Internally every run works in GPa, g/cm3, km and
s (speeds in km/s): the penalty terms carry units, and in these units the
penalty flux is well scaled for Earth materials.  Everything written to disk
is converted back to SI.
"""

import csv
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .config import BC_SIDES, ConfigError
from .dg_core import FIELDS, DGOperator, ExactBoundary, FluxOperators
from .materials import load_material
from .mesh2d import read_mesh, tag_layers, uniform_tri_mesh
from .refelem import build_reference
from .sources import PointSource, ReceiverSet, SourceSpec
from .timeint import LSRK54, estimate_dt
from .verify import (greens_trace, l2_error, operator_spectrum, plane_wave_boundary,
                     plane_wave_field, plane_wave_modes)
from .vtk_io import write_snapshot

LENGTH = 1e3                 # m per km
STRESS = 1e9                 # Pa per GPa
# working -> SI factor of every state field; memory variables carry sqrt(stress)
FIELD_SCALE = dict(s11=STRESS, s33=STRESS, s13=STRESS,
                   a1=STRESS ** 0.5, a2=STRESS ** 0.5, a5=STRESS ** 0.5,
                   v1=LENGTH, v3=LENGTH)
ENERGY = 1e15                # J/m per (GPa km^2)
# SI source amplitude -> working units: force per length (N/m) on velocity
# rows, stress rate times area (Pa m^2/s) on stress rows
SOURCE_SCALE = dict(v1=1e-12, v3=1e-12, s11=1e-15, s33=1e-15, s13=1e-15)


@dataclass
class Case:
    """A configured operator in working units plus what is needed to run it."""

    config: object
    op: DGOperator
    dt: float
    source: object = None
    receivers: object = None


def _materials(cfg):
    mats = [load_material(cfg.material)]
    if cfg.layer_material:
        mats.append(load_material(cfg.layer_material))
    if cfg.elastic:
        mats = [m.elastic() for m in mats]
    return mats


def _mesh(cfg):
    if cfg.mesh_file:
        mesh = read_mesh(cfg.mesh_file)
        mesh = type(mesh)(mesh.vertices / LENGTH, mesh.triangles, mesh.neighbors,
                          mesh.neighbor_faces, mesh.boundary, mesh.material_id)
    else:
        bounds = tuple(np.array([cfg.x_min, cfg.x_max, cfg.z_min, cfg.z_max]) / LENGTH)
        mesh = uniform_tri_mesh(cfg.nx, cfg.nz, bounds)
    if cfg.layer_z is not None:
        mesh = tag_layers(mesh, cfg.layer_z / LENGTH, below=1, above=0)
    return mesh


def _bcs(cfg, mesh):
    bcs = {}
    for tag in mesh.boundary_tags:
        if tag in BC_SIDES:
            bcs[tag] = cfg.bcs[tag]
        elif tag == "default":
            bcs[tag] = "absorbing"
        else:
            raise ConfigError(f"mesh boundary tag {tag!r} has no condition; use {BC_SIDES}")
    return bcs


def build_case(cfg, with_source=True, with_receivers=True, backend="auto"):
    """Operator, time step, source and receivers for ``cfg``, in working units."""
    mats = [m.rescaled() for m in _materials(cfg)]
    mesh = _mesh(cfg)
    op = DGOperator(mesh, build_reference(cfg.order), mats,
                    FluxOperators(cfg.alpha_sigma, cfg.alpha_v), _bcs(cfg, mesh), backend=backend)
    dt = estimate_dt(op, cfg.cfl, cfg.c_n)
    case = Case(cfg, op, dt)
    if with_source:
        targets = {k: w * SOURCE_SCALE[k] for k, w in cfg.source_targets.items()}
        spec = SourceSpec(cfg.source_kind, cfg.source_f0, cfg.t0,
                          (cfg.source_x / LENGTH, cfg.source_z / LENGTH),
                          cfg.source_amplitude, targets)
        case.source = PointSource(spec, op)
        op.sources.append(case.source)
    if with_receivers and cfg.receivers:
        case.receivers = ReceiverSet(op, np.array(cfg.receivers) / LENGTH, cfg.receiver_fields)
    return case


def to_si(q):
    """State in working units -> SI (new array)."""
    scale = np.array([FIELD_SCALE[f] for f in FIELDS])
    return q * scale[:, None, None]


# -- simulate -----------------------------------------------------------------


@dataclass
class RunResult:
    times: np.ndarray
    traces: np.ndarray           # (nrec, nt, nfields), SI
    summary: dict
    snapshots: list = field(default_factory=list)
    state: np.ndarray = None     # final state, SI


def run_simulation(cfg, out_dir=None, q0=None):
    """Time-domain run with source, receivers and snapshots.

    ``q0`` is an optional initial state in SI.  Traces are written to
    ``receiver_NNN.csv``, snapshots to ``snapshot_NNNNNN.vtk`` and the run
    summary to ``summary.txt`` when ``out_dir`` is given.
    """
    case = build_case(cfg)
    op, dt = case.op, case.dt
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    q = op.zeros() if q0 is None else np.asarray(q0, dtype=float) / to_si(np.ones(op.shape))
    rec = case.receivers
    snaps = []

    def snapshot(n, t, state):
        if out_dir and cfg.snapshot_every and n % cfg.snapshot_every == 0:
            path = os.path.join(out_dir, f"snapshot_{n:06d}.vtk")
            snaps.append(write_snapshot(to_si(state), op, path, t))

    def observe(n, t, state):
        if rec is not None:
            rec.record(state, t)
        snapshot(n, t, state)

    observe(0, 0.0, q)
    stepper = LSRK54(dt, cfg.check_every)
    start = time.perf_counter()
    q = stepper.advance(op.rhs, q, 0.0, cfg.t_final, callback=observe)
    wall = time.perf_counter() - start

    scale = np.array([FIELD_SCALE[f] for f in cfg.receiver_fields])
    if rec is not None:
        times, traces = rec.traces()
        traces = traces * scale
    else:
        times, traces = np.zeros(0), np.zeros((0, 0, len(cfg.receiver_fields)))
    steps = int(np.ceil(cfg.t_final / dt - 1e-12))
    summary = {
        "config_hash": cfg.digest,
        "material": cfg.material,
        "elastic": cfg.elastic,
        "elements": op.mesh.K,
        "order": cfg.order,
        "alpha_sigma": cfg.alpha_sigma,
        "alpha_v": cfg.alpha_v,
        "dt_s": dt,
        "steps": steps,
        "t_final_s": cfg.t_final,
        "final_energy_J_per_m": op.energy(q) * ENERGY,
        "wall_time_s": wall,
        "receivers": len(cfg.receivers),
        "snapshots": len(snaps),
    }
    if out_dir:
        _write_traces(out_dir, "receiver", times, traces, cfg.receiver_fields)
        write_summary(os.path.join(out_dir, "summary.txt"), summary)
    return RunResult(times, traces, summary, snaps, to_si(q))


def _write_traces(out_dir, prefix, times, traces, names):
    paths = []
    for r in range(traces.shape[0]):
        path = os.path.join(out_dir, f"{prefix}_{r:03d}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("t",) + tuple(names))
            for i, t in enumerate(times):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in traces[r, i]])
        paths.append(path)
    return paths


def write_summary(path, summary):
    with open(path, "w") as fh:
        for k, v in summary.items():
            fh.write(f"{k}: {v}\n")


def read_summary(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            k, _, v = line.partition(":")
            out[k.strip()] = v.strip()
    return out


# -- convergence --------------------------------------------------------------


@dataclass
class ConvergenceTable:
    rows: list                   # (N, cells, h_m, error)
    slopes: dict                 # N -> least-squares slope
    monotone: dict               # N -> errors strictly decreasing

    def errors(self, N):
        return np.array([r[3] for r in self.rows if r[0] == N])

    def spacings(self, N):
        return np.array([r[2] for r in self.rows if r[0] == N])


def convergence_rate(h, err):
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def run_convergence(cfg, cells=None, orders=None, out_dir=None):
    """Plane-wave errors at ``t_final`` on uniform meshes of the configured box.

    The exact solution is imposed as exterior data on every boundary face.
    Non-monotone error sequences are flagged in the table, not raised.
    """
    cells = tuple(cfg.conv_cells if cells is None else cells)
    orders = tuple(cfg.conv_orders if orders is None else orders)
    mat = _materials(cfg)[0].rescaled()
    k = np.array(cfg.wave_vector) * LENGTH
    sol = plane_wave_modes(mat, k)
    exact = lambda x, z, t: plane_wave_field(sol, x, z, t)      # noqa: E731
    bc = plane_wave_boundary(sol)
    bounds = np.array([cfg.x_min, cfg.x_max, cfg.z_min, cfg.z_max]) / LENGTH
    rows, slopes, monotone = [], {}, {}
    for N in orders:
        ops = build_reference(N)
        errs, hs = [], []
        for n in cells:
            mesh = uniform_tri_mesh(n, n, tuple(bounds))
            op = DGOperator(mesh, ops, [mat], FluxOperators(cfg.alpha_sigma, cfg.alpha_v),
                            {t: bc for t in mesh.boundary_tags})
            q0 = exact(op.geom.x, op.geom.z, 0.0)
            dt = estimate_dt(op, cfg.cfl, cfg.c_n)
            q = LSRK54(dt, cfg.check_every).advance(op.rhs, q0, 0.0, cfg.t_final)
            err = l2_error(op, q, exact, cfg.t_final)
            h = (cfg.x_max - cfg.x_min) / n
            rows.append((N, n, h, err))
            errs.append(err)
            hs.append(h)
        slopes[N] = convergence_rate(hs, errs) if len(cells) > 1 else float("nan")
        monotone[N] = bool(np.all(np.diff(errs) < 0))
    table = ConvergenceTable(rows, slopes, monotone)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "convergence.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("N", "cells", "h_m", "relative_l2_error"))
            for r in rows:
                w.writerow([r[0], r[1], repr(float(r[2])), repr(float(r[3]))])
        with open(os.path.join(out_dir, "rates.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("N", "slope", "monotone"))
            for N in orders:
                w.writerow([N, repr(slopes[N]), monotone[N]])
    return table


# -- spectrum -----------------------------------------------------------------


def run_spectrum(cfg, out_dir=None, max_unknowns=None):
    """Eigenvalues of the assembled semi-discrete operator (1/s)."""
    case = build_case(cfg, with_source=False, with_receivers=False)
    kw = {} if max_unknowns is None else {"max_unknowns": max_unknowns}
    spec = operator_spectrum(case.op, **kw)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        ev = spec.eigenvalues[np.lexsort((spec.eigenvalues.imag, spec.eigenvalues.real))]
        with open(os.path.join(out_dir, "eigenvalues.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("real", "imag"))
            for e in ev:
                w.writerow([repr(float(e.real)), repr(float(e.imag))])
        write_summary(os.path.join(out_dir, "summary.txt"), {
            "config_hash": cfg.digest,
            "unknowns": spec.eigenvalues.size,
            "max_real": spec.max_real,
            "spectral_radius": spec.spectral_radius,
            "normalized_max_real": spec.normalized_max_real,
        })
    return spec


# -- greens-compare -----------------------------------------------------------


@dataclass
class GreensComparison:
    times: np.ndarray
    numerical: np.ndarray        # (nrec, nt, 2) v1, v3 in m/s
    analytic: np.ndarray
    misfit: np.ndarray           # (nrec, 2)
    summary: dict


def _check_isotropic(mat):
    c = mat.stiffness_2d
    c11, c33, c13, c55 = c[0, 0], c[1, 1], c[0, 1], c[2, 2]
    if not (np.isclose(c11, c33, rtol=1e-9) and np.isclose(c11 - c13, 2 * c55, rtol=1e-9)):
        raise ConfigError(f"greens-compare needs an isotropic material; {mat.name!r} is not")
    if not np.allclose(mat.tau_eps[1:], mat.tau_eps[1]) or not np.allclose(mat.tau_sig[1:], mat.tau_sig[1]):
        raise ConfigError("greens-compare needs one shear relaxation mechanism")


def relative_misfit(numerical, analytic):
    return float(np.linalg.norm(numerical - analytic) / np.linalg.norm(analytic))


def run_greens_compare(cfg, out_dir=None):
    """Solver traces against the frequency-domain Green's function synthesis.

    Needs an isotropic material, a ``gauss_cosine`` wavelet and a force on
    ``v3`` only.  Misfit is the relative L2 difference per component.
    """
    if cfg.source_kind != "gauss_cosine":
        raise ConfigError("greens-compare needs source_kind = gauss_cosine")
    if set(cfg.source_targets) != {"v3"}:
        raise ConfigError("greens-compare needs source_targets = v3")
    if not cfg.receivers:
        raise ConfigError("greens-compare needs at least one receiver")
    mat = _materials(cfg)[0]
    _check_isotropic(mat)
    cfg_run = _with_fields(cfg, ("v1", "v3"))
    run = run_simulation(cfg_run)
    times = run.times
    dt = times[1] - times[0]
    uniform = np.arange(len(times)) * dt
    force = cfg.source_amplitude * cfg.source_targets["v3"] * SOURCE_SCALE["v3"]
    spec = SourceSpec(cfg.source_kind, cfg.source_f0, cfg.t0, (0.0, 0.0), force)
    work = mat.rescaled()
    ana = []
    for x, z in cfg.receivers:
        rel = ((x - cfg.source_x) / LENGTH, (z - cfg.source_z) / LENGTH)
        v1, v3 = greens_trace(work, rel, spec.spectrum, uniform, cfg.source_f0, cfg.velocity_form)
        ana.append(np.stack([np.interp(times, uniform, v1), np.interp(times, uniform, v3)], axis=1))
    ana = np.array(ana) * LENGTH
    num = run.traces
    misfit = np.array([[relative_misfit(num[r, :, c], ana[r, :, c]) for c in range(2)]
                       for r in range(len(cfg.receivers))])
    summary = dict(run.summary)
    summary.update({
        "velocity_form": cfg.velocity_form,
        "misfit_v1": ", ".join(f"{m:.6g}" for m in misfit[:, 0]),
        "misfit_v3": ", ".join(f"{m:.6g}" for m in misfit[:, 1]),
        "tolerance": cfg.misfit_tolerance,
        "passed": bool(np.all(misfit < cfg.misfit_tolerance)),
    })
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        both = np.concatenate([num, ana], axis=2)
        _write_traces(out_dir, "greens", times, both, ("v1_dg", "v3_dg", "v1_exact", "v3_exact"))
        with open(os.path.join(out_dir, "misfit.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("x_m", "z_m", "misfit_v1", "misfit_v3"))
            for (x, z), m in zip(cfg.receivers, misfit):
                w.writerow([repr(x), repr(z), repr(float(m[0])), repr(float(m[1]))])
        write_summary(os.path.join(out_dir, "summary.txt"), summary)
    return GreensComparison(times, num, ana, misfit, summary)


def _with_fields(cfg, fields):
    from dataclasses import replace
    return replace(cfg, receiver_fields=tuple(fields), snapshot_every=0)
