"""Command line entry point: ``savmag run | bench | compare``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

from .bench import bench, format_table, load_reference_energy, relative_error
from .config import load_config, parse_overrides
from .errors import SavmagError
from .io import read_trace
from .runner import run


def _cmd_run(args) -> int:
    cfg = load_config(args.config, parse_overrides(args.set))
    res = run(cfg, write=True)
    s = res.summary
    print(f"{s['name']}: {s['steps']} steps, t={s['final_time']:.4g} s, wall {s['wall_time']:.2f} s")
    print(f"energy_density    = {s['energy_density']:.8g}")
    print(f"energy_density_Kd = {s['energy_density_Kd']:.8g}")
    print(f"max |m|-1         = {s['max_norm_deviation']:.3g}")
    if "worst_intermediate_increase" in s:
        print(f"intermediate dissipation violations = {s['intermediate_violations']}")
    print(f"outputs written to {cfg.output_dir}/")
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config, parse_overrides(args.set))
    if args.ref is not None:
        reference = load_reference_energy(args.ref)
    elif args.ref_energy is not None:
        reference = args.ref_energy
    else:
        raise SystemExit("bench needs --ref or --ref-energy")
    if args.kd:
        reference /= 2.0
    dts = [float(d) for d in args.dts.split(",")]
    pairs = [(s, dt) for s in args.schemes.split(",") for dt in dts]
    entries = bench(cfg, pairs, reference, args.tol)
    table = format_table(entries)
    print(table)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump([asdict(e) for e in entries], fh, indent=2)
    return 0


def _cmd_compare(args) -> int:
    ref = read_trace(args.ref)["normalized_total"][-1]
    test = read_trace(args.test)["normalized_total"][-1]
    err = relative_error(test, ref)
    status = "PASS" if err < args.tol else "FAIL"
    print(f"reference {ref:.8g}  test {test:.8g}  relative error {err:.4%}  tol {args.tol:g}  {status}")
    return 0 if err < args.tol else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="savmag", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation from a manifest")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a manifest key")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bench", help="time a scheme x dt matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--schemes", default="fep,bep,sav1,sav2")
    p.add_argument("--dts", default="1.42e-12,1e-12,5e-13,1e-13")
    p.add_argument("--ref", help="reference run summary (.json) or trace (.csv)")
    p.add_argument("--ref-energy", type=float, help="reference energy density (per volume)")
    p.add_argument("--kd", action="store_true", help="--ref-energy is given in units of K_d")
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--output", help="write entries as JSON")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("compare", help="relative error between final energies of two traces")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--tol", type=float, default=0.01)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (SavmagError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
