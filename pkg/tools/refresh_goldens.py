"""Regenerate golden/<name>/ from configs/<name>.cfg.

    python tools/refresh_goldens.py                 run every config, then copy
    python tools/refresh_goldens.py divcurl         run only the named configs
    python tools/refresh_goldens.py --from-runs     copy existing run dirs, no rerun

Only constants.json and checks/exact.json are kept: those are the files a
golden comparison reads.
"""
from __future__ import annotations

import argparse
import shutil
import sys
from pathlib import Path

from pcal.config import load_config
from pcal.harness import resolve_paths, run

ROOT = Path(__file__).resolve().parent.parent
KEPT = ("constants.json", "checks/exact.json")


def refresh(name: str, rerun: bool) -> None:
    cfg_path = ROOT / "configs" / f"{name}.cfg"
    cfg = load_config(cfg_path, {"golden": "none"})
    run_dir, _ = resolve_paths(cfg)
    if rerun:
        outcome = run(cfg)
        run_dir = outcome.output_dir
        if outcome.exit_code != 0:
            raise SystemExit(f"{name}: run exited with {outcome.exit_code}")
    gold = ROOT / "golden" / name
    for rel in KEPT:
        src = run_dir / rel
        if not src.exists():
            raise SystemExit(f"{name}: missing {src}")
        (gold / rel).parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(src, gold / rel)
    print(f"{name}: {gold.relative_to(ROOT)}")


def main() -> int:
    p = argparse.ArgumentParser()
    p.add_argument("names", nargs="*")
    p.add_argument("--from-runs", action="store_true")
    args = p.parse_args()
    names = args.names or sorted(c.stem for c in (ROOT / "configs").glob("*.cfg"))
    for name in names:
        refresh(name, not args.from_runs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
