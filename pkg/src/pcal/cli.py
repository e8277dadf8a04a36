"""Command line entry point: pcal run | compare | profile-dump | field-dump | list."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigurationError, PcalError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_run(args) -> int:
    from .config import load_config
    from .harness import run

    cfg = load_config(args.config, _overrides(args.set))
    outcome = run(cfg, args.output, args.golden)
    sys.stdout.write((outcome.output_dir / "summary.txt").read_text())
    return outcome.exit_code


def cmd_compare(args) -> int:
    from .harness import compare_golden

    diff = compare_golden(args.run_dir, args.golden_dir)
    sys.stdout.write(diff.text())
    return EXIT_OK if diff.ok else EXIT_FAIL


def cmd_profile_dump(args) -> int:
    from .lp import DyadicProfile

    sys.stdout.write(DyadicProfile().to_csv(args.t_max, args.count))
    return EXIT_OK


def cmd_field_dump(args) -> int:
    from .fields import read_field

    f = read_field(args.path)
    s = f.samples
    info = {"dim": f.grid.dim, "N": f.grid.points, "L": f.grid.length,
            "min": float(s.min()), "max": float(s.max()), "mean": float(s.mean()),
            "rms": float(np.sqrt(np.mean(s * s)))}
    sys.stdout.write(json.dumps(info, indent=2) + "\n")
    return EXIT_OK


def cmd_list(args) -> int:
    from .experiments import REGISTRY

    for name in sorted(REGISTRY):
        sys.stdout.write(f"{name:22s} {REGISTRY[name].description}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcal", description="Spectral pressure and function-space norm experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")
    r.add_argument("--output", "-o", help="run directory (overrides output_dir)")
    r.add_argument("--golden", "-g", help="golden directory (overrides golden)")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="compare a run directory with a golden directory")
    c.add_argument("run_dir")
    c.add_argument("golden_dir")
    c.set_defaults(func=cmd_compare)

    d = sub.add_parser("profile-dump", help="CSV of the low-pass and annulus cutoff profiles")
    d.add_argument("--t-max", type=float, default=2.5)
    d.add_argument("--count", type=int, default=501)
    d.set_defaults(func=cmd_profile_dump)

    f = sub.add_parser("field-dump", help="header and statistics of a binary field file")
    f.add_argument("path")
    f.set_defaults(func=cmd_field_dump)

    ls = sub.add_parser("list", help="list registered experiments")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (PcalError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
