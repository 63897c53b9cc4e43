"""Command-line entry point.

Subcommands:
  characterize   resolve a configuration and report trap quantities
  simulate       Monte Carlo efficiency estimate (summary JSON)
  sweep          efficiency over a v_b and/or T_r grid (CSV)
  potential-map  2D potential grid for contour plotting (CSV)
  sample-check   dump sampled initial states (CSV) for statistical audits

Exit codes: 0 success, 2 configuration error, 3 untrappable configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import ConfigError, load_config, parse_quantity, serialize_config
from .constants import K_B
from .montecarlo import (SWEEP_CSV_HEADER, UntrappableConfigError,
                         loading_rate, run_experiment, sweep,
                         sweep_rows_to_csv)
from .potentials import characterize_trap, potential_map
from .sampling import make_rng_stream, sample_initial_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNTRAPPABLE = 3

_UNIT_HELP = (
    "Config keys (flat 'key = value' lines, unit suffixes allowed): "
    "guide.gradient [T/m, G/cm] or guide.bar_current [A] + guide.bar_spacing [m]; "
    "odt.power [W]; odt.waist [m, um]; odt.wavelength [m, nm]; "
    "odt.depth [J or K/mK/uK via k_B]; loop.radius [m, mm]; "
    "loop.current [A] (default: barrier-matched to beam.v_b); "
    "beam.v_b [m/s]; beam.T_r, beam.T_z [K, mK]; beam.flux [atoms/s]; "
    "beam.z_start [m] (default -0.05 m)."
)


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def _config_header_lines(config, seed=None):
    lines = ["# resolved configuration:"]
    for line in serialize_config(config).strip().splitlines():
        lines.append(f"#   {line}")
    lines.append(f"# fingerprint = {config.fingerprint()}")
    if seed is not None:
        lines.append(f"# seed = {seed}")
    return lines


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odtload",
        description="Monte Carlo simulator for loading an optical dipole trap "
                    "from a magnetically guided atom beam.",
        epilog=_UNIT_HELP)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_seed=True):
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       dest="overrides", help="override a config key")
        p.add_argument("--output", "-o", default=None,
                       help="output file (default stdout)")
        if needs_seed:
            p.add_argument("--seed", type=int, default=0, help="master seed")
            p.add_argument("--workers", type=int, default=None,
                           help="worker thread count (results are identical "
                                "for any value)")

    p = sub.add_parser("characterize", help="report trap quantities")
    common(p, needs_seed=False)

    p = sub.add_parser("simulate", help="run one efficiency estimate")
    common(p)
    p.add_argument("--n", type=int, default=50000, help="trajectory count")

    p = sub.add_parser("sweep", help="efficiency over a parameter grid")
    common(p)
    p.add_argument("--n", type=int, default=50000,
                   help="trajectory count per grid point")
    p.add_argument("--grid", action="append", required=True,
                   metavar="PARAM=V1,V2,...",
                   help="grid values, e.g. T_r=0.125mK,0.25mK,1mK or v_b=2,5")

    p = sub.add_parser("potential-map", help="2D potential grid CSV")
    common(p, needs_seed=False)
    p.add_argument("--plane", choices=["x-z", "y-z", "x-y"], default="x-z")
    p.add_argument("--mj", type=int, default=3, help="Zeeman sublevel mJ")
    p.add_argument("--extent", default=None,
                   help="half-widths 'a1,a2' in metres (default 4R x 4zR)")
    p.add_argument("--resolution", default="201,201",
                   help="grid points per axis, 'n1,n2'")

    p = sub.add_parser("sample-check", help="dump sampled initial states")
    common(p)
    p.add_argument("--n", type=int, default=10000, help="sample count")
    return parser


def _parse_grid(specs):
    grids = {}
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"--grid expects PARAM=v1,v2,..., got {spec!r}")
        name, _, values = spec.partition("=")
        name = name.strip()
        if name not in ("v_b", "T_r"):
            raise ConfigError(f"--grid parameter must be v_b or T_r, got {name!r}")
        dim = "velocity" if name == "v_b" else "temperature"
        # compact forms like 0.125mK are allowed
        grids[name] = [parse_quantity(_split_unit(item.strip()), dim, name)
                       for item in values.split(",")]
    return grids


def _split_unit(item: str) -> str:
    """Turn compact '0.125mK' into '0.125 mK' for the quantity parser."""
    i = len(item)
    while i > 0 and not (item[i - 1].isdigit() or item[i - 1] == "."):
        i -= 1
    if i == len(item):
        return item
    # keep scientific-notation exponents attached to the number
    head, tail = item[:i], item[i:]
    if head.endswith(("e", "E")) or tail.startswith(("+", "-")):
        return item
    return f"{head} {tail.strip()}"


def run_cli(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, _parse_overrides(args.overrides))
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "characterize":
            trap = characterize_trap(config)
            lines = _config_header_lines(config)
            lines += [
                f"I_c = {config.loop.current:.6g} A",
                f"z_R = {config.odt.rayleigh:.6g} m",
                f"kappa = {config.odt.kappa:.6g} Hz m^2/W",
                f"depth = {config.odt.depth:.6g} J "
                f"({config.odt.depth / K_B * 1e3:.4g} mK)",
                f"beta = {config.beta:.6g} m",
                f"U_esc = {trap.U_esc:.6g} J ({trap.U_esc / K_B * 1e3:.4g} mK)",
                f"well_minimum = {trap.well_minimum:.6g} J "
                f"({trap.well_minimum / K_B * 1e3:.4g} mK)",
                f"untrappable = {trap.untrappable}",
            ]
            if trap.saddle_location is not None:
                lines.append("saddle_location = "
                             f"{trap.saddle_location.tolist()} m")
            if trap.untrappable:
                _write(args.output, "\n".join(lines) + "\n")
                return EXIT_UNTRAPPABLE
            _write(args.output, "\n".join(lines) + "\n")
            return EXIT_OK

        if args.command == "simulate":
            est = run_experiment(config, args.n, args.seed, workers=args.workers)
            payload = est.to_dict()
            payload["config"] = config.to_dict()
            rate = loading_rate(est.lam, config.beam.flux)
            payload["loading_rate_per_s"] = rate
            _write(args.output, json.dumps(payload, indent=2, sort_keys=True) + "\n")
            return EXIT_OK

        if args.command == "sweep":
            grids = _parse_grid(args.grid)
            rows = sweep(config, args.n, args.seed,
                         v_b_values=grids.get("v_b"),
                         T_r_values=grids.get("T_r"),
                         workers=args.workers)
            header = "\n".join(_config_header_lines(config, seed=args.seed))
            _write(args.output, header + "\n" + sweep_rows_to_csv(rows))
            return EXIT_OK

        if args.command == "potential-map":
            if args.extent:
                e1, e2 = (float(v) for v in args.extent.split(","))
            else:
                e1 = 4.0 * config.loop.radius
                e2 = 4.0 * max(config.loop.radius, config.odt.rayleigh)
            n1, n2 = (int(v) for v in args.resolution.split(","))
            a1, a2, U = potential_map(args.plane, (e1, e2), (n1, n2),
                                      args.mj, config)
            lines = _config_header_lines(config)
            lines.append("axis1,axis2,U_joule")
            for i, v1 in enumerate(a1):
                for j, v2 in enumerate(a2):
                    lines.append(f"{float(v1)!r},{float(v2)!r},{float(U[i, j])!r}")
            _write(args.output, "\n".join(lines) + "\n")
            return EXIT_OK

        if args.command == "sample-check":
            lines = _config_header_lines(config, seed=args.seed)
            lines.append("x,y,z,vx,vy,vz")
            for i in range(args.n):
                s = sample_initial_state(make_rng_stream(args.seed, i), config)
                row = np.concatenate([s.position, s.velocity])
                lines.append(",".join(repr(float(v)) for v in row))
            _write(args.output, "\n".join(lines) + "\n")
            return EXIT_OK
    except UntrappableConfigError as exc:
        print(f"untrappable configuration: {exc}", file=sys.stderr)
        return EXIT_UNTRAPPABLE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable")


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
