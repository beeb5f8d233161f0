"""Command-line entry point: ``coupling-lab {sweep,check,verify,region}``."""

import argparse
import sys

import numpy as np

from . import multiport
from .criteria import Role
from .errors import ConfigError, CouplingLabError
from .report import emit_csv, emit_plot
from .scenarios import PRESETS, classify_region, load_config, sweep_row, run_sweep

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _add_scenario_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", choices=sorted(PRESETS), help="built-in preset")
    src.add_argument("--config", metavar="PATH", help="key = value scenario file")
    p.add_argument("--distance", type=float, help="override link distance r [m]")
    p.add_argument("--threshold", type=float, help="required margin (default 10)")
    p.add_argument("--role", choices=[r.value for r in Role], help="array transmits (miso) or receives (simo)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coupling-lab",
        description="Inter-array coupling conditions for massive MISO/SIMO links.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="sweep the array size N and tabulate the condition")
    _add_scenario_args(p)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--points", type=int)
    p.add_argument("--csv", metavar="PATH", help="CSV output (default: stdout)")
    p.add_argument("--svg", metavar="PATH", help="also render a log-log SVG figure")

    p = sub.add_parser("check", help="evaluate the condition for a single N")
    _add_scenario_args(p)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("verify", help="randomized self-test of the transfer-matrix algebra")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("region", help="classify the field region of an aperture")
    p.add_argument("--aperture", type=float, required=True, help="D [m]")
    p.add_argument("--wavelength", type=float, required=True, help="lambda [m]")
    p.add_argument("--distance", type=float, required=True, help="r [m]")
    return parser


def _config(args, **extra):
    cfg = PRESETS[args.scenario]() if args.scenario else load_config(args.config)
    role = Role(args.role) if args.role else None
    return cfg.replace(distance=args.distance, threshold=args.threshold, role=role, **extra)


def _cmd_sweep(args, out):
    cfg = _config(args, n_min=args.n_min, n_max=args.n_max, points=args.points)
    rows = run_sweep(cfg)
    if args.csv:
        emit_csv(rows, args.csv)
    else:
        out.write(emit_csv(rows).decode("utf-8"))
    if args.svg:
        emit_plot(rows, cfg, args.svg)
    failed = [r.n for r in rows if not r.verdict]
    log = sys.stderr if not args.csv else out
    print(f"{cfg.name}: {len(rows)} rows, N in [{rows[0].n}, {rows[-1].n}], "
          f"min margin_bound {min(r.margin_bound for r in rows):.4g}, "
          f"{len(failed)} below threshold {cfg.threshold:g}", file=log)
    return EXIT_OK


def _cmd_check(args, out):
    cfg = _config(args)
    row = sweep_row(cfg, args.n)
    def line(label, value):
        out.write(f"  {label:<16} {value}\n")
    out.write(f"{cfg.name} ({cfg.role.value}), N = {row.n}\n")
    line("spacing d", f"{row.d_m:.6g} m")
    line("aperture D", f"{row.aperture_m:.6g} m")
    reg = row.region
    line("region", reg.region.value + (" (boundary)" if reg.near_boundary else "")
         + (f" [{row.annotation}]" if row.annotation else ""))
    line("fresnel", f"{reg.fresnel_distance:.6g} m")
    line("fraunhofer", f"{reg.fraunhofer_distance:.6g} m")
    line("lhs", f"{row.lhs:.6e} ohm")
    line("rhs_bound", f"{row.rhs_bound:.6e} ohm")
    if row.rhs_exact is not None:
        line("rhs_exact", f"{row.rhs_exact:.6e} ohm")
    if row.poisson_limit is not None:
        line("poisson_limit", f"{row.poisson_limit:.6e} ohm")
    line("margin_bound", f"{row.margin_bound:.6e}")
    if row.margin_exact is not None:
        line("margin_exact", f"{row.margin_exact:.6e}")
    verdict = "PASS" if row.verdict else "FAIL"
    line("verdict", f"{verdict} (threshold {cfg.threshold:g})")
    return EXIT_OK if row.verdict else EXIT_FAIL


def _cmd_verify(args, out):
    results = multiport.self_test(count=args.count, seed=args.seed)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        out.write(f"{status}  {res.name}: worst {res.worst:.3e} (tol {res.tolerance:.0e})\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _cmd_region(args, out):
    reg = classify_region(args.aperture, args.wavelength, args.distance)
    out.write(f"{reg.region.value}{' (boundary)' if reg.near_boundary else ''}\n")
    out.write(f"  fresnel    {reg.fresnel_distance:.6g} m\n")
    out.write(f"  fraunhofer {reg.fraunhofer_distance:.6g} m\n")
    return EXIT_OK


COMMANDS = {"sweep": _cmd_sweep, "check": _cmd_check, "verify": _cmd_verify, "region": _cmd_region}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (ConfigError, OSError) as exc:
        print(f"coupling-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CouplingLabError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"coupling-lab: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
