"""Run configuration: ``key = value`` text with unit-suffixed quantities.

Every key is listed in ``KEYS``; anything else is an error.  Quantities are
converted to SI at parse time.  Example::

    material   = sandstone
    x_min = -1 km
    x_max =  1 km
    z_min = -1 km
    z_max =  1 km
    nx = 48
    nz = 48
    order = 3
    t_final = 0.4 s
    bc_left = absorbing
    source_kind = ricker
    source_f0 = 20 Hz
    source_t0 = 0.06 s
    source_x = 0 m
    source_z = 0 m
    receivers = 250 m 250 m; -250 m 250 m
"""

import hashlib
from dataclasses import dataclass, field, replace

from .units import UnitError, parse_quantity

BC_SIDES = ("left", "right", "bottom", "top")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    material: str = "sandstone"
    elastic: bool = False
    mesh_file: str = ""
    x_min: float = 0.0
    x_max: float = 1000.0
    z_min: float = 0.0
    z_max: float = 1000.0
    nx: int = 8
    nz: int = 8
    layer_z: float = None
    layer_material: str = ""
    order: int = 3
    alpha_sigma: float = 0.5
    alpha_v: float = 0.5
    cfl: float = 0.5
    c_n: float = None
    t_final: float = 1.0
    bcs: dict = field(default_factory=lambda: {s: "absorbing" for s in BC_SIDES})
    source_kind: str = "ricker"
    source_f0: float = 20.0
    source_t0: float = None
    source_x: float = 0.0
    source_z: float = 0.0
    source_amplitude: float = 1.0
    source_targets: dict = field(default_factory=lambda: {"v3": 1.0})
    receivers: tuple = ()
    receiver_fields: tuple = ("v1", "v3")
    snapshot_every: int = 0
    check_every: int = 50
    seed: int = 0
    # convergence
    conv_orders: tuple = (1, 2, 3)
    conv_cells: tuple = (2, 4, 8, 16)
    wave_vector: tuple = (4.442882938158366e-3, 4.442882938158366e-3)
    # greens-compare
    velocity_form: str = "consistent"
    misfit_tolerance: float = 0.05
    text: str = ""

    @property
    def digest(self):
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]

    @property
    def t0(self):
        return 1.2 / self.source_f0 if self.source_t0 is None else self.source_t0


def _length(v):
    return parse_quantity(v)


def _bool(v):
    low = v.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}")


def _int(v):
    try:
        return int(v)
    except ValueError:
        raise ConfigError(f"expected an integer, got {v!r}") from None


def _float(v):
    try:
        return float(v)
    except ValueError:
        raise ConfigError(f"expected a number, got {v!r}") from None


def _int_list(v):
    return tuple(_int(s) for s in v.replace(",", " ").split())


def _points(v):
    """``x z; x z`` with units, e.g. ``250 m 250 m; 0.1 km 0 m``."""
    pts = []
    for chunk in v.split(";"):
        toks = chunk.split()
        if not toks:
            continue
        if len(toks) == 4:
            pts.append((parse_quantity(" ".join(toks[:2])), parse_quantity(" ".join(toks[2:]))))
        elif len(toks) == 2 and toks[0][-1].isalpha() and toks[1][-1].isalpha():
            pts.append((parse_quantity(toks[0]), parse_quantity(toks[1])))
        else:
            raise ConfigError(f"cannot parse point {chunk.strip()!r}; use 'x unit z unit'")
    return tuple(pts)


def _weights(v):
    """``v3:1, s11:0.5`` -> dict."""
    out = {}
    for item in v.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, w = item.partition(":")
        out[name.strip()] = _float(w) if w else 1.0
    return out


def _wave_vector(v):
    """Two components in 1/m, written as ``kx kz`` with optional ``1/m`` or ``1/km``."""
    toks = v.replace(",", " ").split()
    scale = 1.0
    if toks and toks[-1] in ("1/m", "1/km"):
        scale = 1.0 if toks[-1] == "1/m" else 1e-3
        toks = toks[:-1]
    if len(toks) != 2:
        raise ConfigError("wave_vector needs two components")
    return tuple(_float(t) * scale for t in toks)


_PARSERS = {
    "material": ("material", str),
    "elastic": ("elastic", _bool),
    "mesh_file": ("mesh_file", str),
    "x_min": ("x_min", _length),
    "x_max": ("x_max", _length),
    "z_min": ("z_min", _length),
    "z_max": ("z_max", _length),
    "nx": ("nx", _int),
    "nz": ("nz", _int),
    "layer_z": ("layer_z", _length),
    "layer_material": ("layer_material", str),
    "order": ("order", _int),
    "alpha_sigma": ("alpha_sigma", _float),
    "alpha_v": ("alpha_v", _float),
    "cfl": ("cfl", _float),
    "c_n": ("c_n", _float),
    "t_final": ("t_final", parse_quantity),
    "source_kind": ("source_kind", str),
    "source_f0": ("source_f0", parse_quantity),
    "source_t0": ("source_t0", parse_quantity),
    "source_x": ("source_x", _length),
    "source_z": ("source_z", _length),
    "source_amplitude": ("source_amplitude", _float),
    "source_targets": ("source_targets", _weights),
    "receivers": ("receivers", _points),
    "receiver_fields": ("receiver_fields", lambda v: tuple(v.replace(",", " ").split())),
    "snapshot_every": ("snapshot_every", _int),
    "check_every": ("check_every", _int),
    "seed": ("seed", _int),
    "conv_orders": ("conv_orders", _int_list),
    "conv_cells": ("conv_cells", _int_list),
    "wave_vector": ("wave_vector", _wave_vector),
    "velocity_form": ("velocity_form", str),
    "misfit_tolerance": ("misfit_tolerance", _float),
}
KEYS = tuple(sorted(set(_PARSERS) | {"alpha"} | {f"bc_{s}" for s in BC_SIDES}))
_BC_CHOICES = ("free_surface", "absorbing")


def parse_config(text, source="<config>"):
    """Parse and validate a run configuration; errors carry line numbers."""
    values, lines = {}, {}
    bcs = {s: "absorbing" for s in BC_SIDES}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in lines:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        lines[key] = lineno
        try:
            if key == "alpha":
                a = _float(value)
                values.setdefault("alpha_sigma", a)
                values.setdefault("alpha_v", a)
            elif key.startswith("bc_") and key[3:] in BC_SIDES:
                if value not in _BC_CHOICES:
                    raise ConfigError(f"boundary condition must be one of {_BC_CHOICES}")
                bcs[key[3:]] = value
            elif key in _PARSERS:
                name, fn = _PARSERS[key]
                values[name] = fn(value)
            else:
                raise ConfigError(f"unknown key {key!r}")
        except (ConfigError, UnitError) as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    for k in ("alpha_sigma", "alpha_v"):
        if k in lines and "alpha" in lines:
            values[k] = _PARSERS[k][1](_value_at(text, lines[k]))
    cfg = RunConfig(**values, bcs=bcs, text=text)
    _validate(cfg, source, lines)
    return cfg


def _value_at(text, lineno):
    return text.splitlines()[lineno - 1].split("#", 1)[0].split("=", 1)[1].strip()


def _validate(cfg, source, lines):
    def fail(key, msg):
        where = f"{source}:{lines[key]}" if key in lines else source
        raise ConfigError(f"{where}: {msg}")

    if not 1 <= cfg.order <= 8:
        fail("order", "order must be in 1..8")
    if cfg.alpha_sigma < 0 or cfg.alpha_v < 0:
        fail("alpha_sigma" if cfg.alpha_sigma < 0 else "alpha_v", "penalty parameters must be >= 0")
    if not cfg.cfl > 0:
        fail("cfl", "cfl must be positive")
    if not cfg.t_final > 0:
        fail("t_final", "t_final must be positive")
    if not (cfg.x_max > cfg.x_min and cfg.z_max > cfg.z_min):
        fail("x_max", "domain bounds are empty")
    if cfg.nx < 1 or cfg.nz < 1:
        fail("nx", "nx and nz must be >= 1")
    if cfg.source_kind not in ("ricker", "gauss_cosine"):
        fail("source_kind", "source_kind must be ricker or gauss_cosine")
    if not cfg.source_f0 > 0:
        fail("source_f0", "source_f0 must be positive")
    if cfg.snapshot_every < 0:
        fail("snapshot_every", "snapshot_every must be >= 0")
    if cfg.check_every < 1:
        fail("check_every", "check_every must be >= 1")
    if cfg.velocity_form not in ("consistent", "sum_form"):
        fail("velocity_form", "velocity_form must be consistent or sum_form")
    if (cfg.layer_z is None) != (not cfg.layer_material):
        fail("layer_z", "layer_z and layer_material must be given together")
    from .dg_core import FIELDS
    from .sources import SOURCE_TARGETS

    bad = set(cfg.source_targets) - set(SOURCE_TARGETS)
    if bad or not cfg.source_targets:
        fail("source_targets", f"source targets must be a non-empty subset of {SOURCE_TARGETS}")
    bad = set(cfg.receiver_fields) - set(FIELDS)
    if bad:
        fail("receiver_fields", f"unknown receiver field(s) {sorted(bad)}")
    if min(cfg.conv_orders, default=1) < 1 or max(cfg.conv_orders, default=1) > 8:
        fail("conv_orders", "orders must be in 1..8")
    if min(cfg.conv_cells, default=1) < 1:
        fail("conv_cells", "cell counts must be >= 1")


def with_overrides(cfg, **kw):
    return replace(cfg, **kw)
