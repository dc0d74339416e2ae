"""Command line entry point: ``viscodg <command> --config PATH --out DIR``.

Exit status 0 on success, 2 when the configuration (or a file it names) is
invalid, 3 when a run aborts on non-finite values.
"""

import argparse
import sys

from .config import ConfigError, parse_config
from .dg_core import NumericalInstability
from .materials import MaterialError
from .mesh2d import MeshError
from .units import UnitError
from . import workflows

EXIT_OK, EXIT_INVALID, EXIT_UNSTABLE = 0, 2, 3


def _simulate(cfg, out):
    res = workflows.run_simulation(cfg, out)
    s = res.summary
    print(f"steps={s['steps']} dt={s['dt_s']:.6g} s energy={s['final_energy_J_per_m']:.6g} J/m "
          f"wall={s['wall_time_s']:.1f} s -> {out}")


def _convergence(cfg, out):
    table = workflows.run_convergence(cfg, out_dir=out)
    for N, slope in table.slopes.items():
        flag = "" if table.monotone[N] else "  (non-monotone errors)"
        print(f"N={N} slope={slope:.3f}{flag}")


def _spectrum(cfg, out):
    spec = workflows.run_spectrum(cfg, out)
    print(f"max_real={spec.max_real:.6g} spectral_radius={spec.spectral_radius:.6g} "
          f"normalized={spec.normalized_max_real:.3g}")


def _greens(cfg, out):
    res = workflows.run_greens_compare(cfg, out)
    for (x, z), (m1, m3) in zip(cfg.receivers, res.misfit):
        print(f"receiver ({x:g} m, {z:g} m): misfit v1={m1:.4f} v3={m3:.4f}")
    print("within tolerance" if res.summary["passed"] else
          f"misfit exceeds tolerance {cfg.misfit_tolerance}")


COMMANDS = {
    "simulate": _simulate,
    "convergence": _convergence,
    "spectrum": _spectrum,
    "greens-compare": _greens,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="viscodg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value run configuration")
        p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read(), source=args.config)
        COMMANDS[args.command](cfg, args.out)
    except NumericalInstability as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (ConfigError, MaterialError, MeshError, UnitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
