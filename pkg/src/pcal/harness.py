"""Run experiments to disk and compare run directories against goldens.

A run directory holds:
  config.echo        canonical config, parses back to the same run
  rows.csv           one ReportRow per line, fixed columns, floats with 17 digits
  report.json        rows with notes plus construction reports
  constants.json     fitted constants, compared to goldens within 25%
  checks/exact.json  boolean checks, compared exactly
  summary.txt        human-readable summary with timings
  plot.dat           (J, ratio) pairs for inflation constructions
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import ExperimentConfig
from .experiments import CSV_COLUMNS, REGISTRY, ExperimentResult, ReportRow

CONSTANT_TOLERANCE = 0.25
EXACT_DIR = "checks"


def _format(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def rows_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_format(getattr(row, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return _format(obj)
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        return json_safe(obj.item())
    return obj


def _dumps(obj) -> str:
    return json.dumps(json_safe(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _load_number(v) -> float:
    if isinstance(v, str):
        return float(v)
    return float(v)


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


@dataclass
class GoldenDiff:
    failures: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    compared: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def text(self) -> str:
        lines = [f"FAIL {m}" for m in self.failures] + [f"WARN {m}" for m in self.warnings]
        lines.append(f"{'ok' if self.ok else 'failed'}: {self.compared} values compared, "
                     f"{len(self.failures)} failures, {len(self.warnings)} warnings")
        return "\n".join(lines) + "\n"


def _files(root: Path) -> set[str]:
    return {str(p.relative_to(root)) for p in root.rglob("*") if p.is_file() and not p.name.startswith(".")}


def constant_matches(run: float, golden: float, tol: float = CONSTANT_TOLERANCE) -> bool:
    if math.isnan(golden) or math.isnan(run):
        return math.isnan(golden) and math.isnan(run)
    if math.isinf(golden) or math.isinf(run):
        return run == golden
    if golden == 0:
        return run == 0
    return abs(run - golden) <= tol * abs(golden)


def _compare_constants(diff: GoldenDiff, name: str, run: dict, golden: dict) -> None:
    for key, gv in sorted(golden.items()):
        if key not in run:
            diff.failures.append(f"{name}: constant {key} missing from run")
            continue
        diff.compared += 1
        rv, gv = _load_number(run[key]), _load_number(gv)
        if not constant_matches(rv, gv):
            off = (rv / gv - 1) * 100 if gv not in (0.0,) and math.isfinite(gv) else math.nan
            diff.failures.append(f"{name}: constant {key} = {rv:.6g}, golden {gv:.6g} ({off:+.1f}%)")
    for key in sorted(set(run) - set(golden)):
        diff.warnings.append(f"{name}: constant {key} has no golden counterpart")


def _compare_exact(diff: GoldenDiff, name: str, run: dict, golden: dict) -> None:
    for key, gv in sorted(golden.items()):
        if key not in run:
            diff.failures.append(f"{name}: exact field {key} missing from run")
            continue
        diff.compared += 1
        if run[key] != gv or type(run[key]) is not type(gv):
            diff.failures.append(f"{name}: exact field {key} = {run[key]!r}, golden {gv!r}")
    for key in sorted(set(run) - set(golden)):
        diff.warnings.append(f"{name}: exact field {key} has no golden counterpart")


def compare_golden(run_dir, golden_dir) -> GoldenDiff:
    """Constants within 25%, files under checks/ exactly; missing files fail, extra files warn."""
    run_dir, golden_dir = Path(run_dir), Path(golden_dir)
    diff = GoldenDiff()
    for d, label in ((run_dir, "run"), (golden_dir, "golden")):
        if not d.is_dir():
            diff.failures.append(f"{label} directory {d} does not exist")
    if diff.failures:
        return diff
    run_files, golden_files = _files(run_dir), _files(golden_dir)
    for name in sorted(golden_files):
        if name not in run_files:
            diff.failures.append(f"{name}: missing from run directory")
            continue
        if name == "constants.json" or name.startswith(EXACT_DIR + os.sep):
            try:
                run = json.loads((run_dir / name).read_text())
                golden = json.loads((golden_dir / name).read_text())
            except json.JSONDecodeError as exc:
                diff.failures.append(f"{name}: unreadable JSON ({exc})")
                continue
            if name == "constants.json":
                _compare_constants(diff, name, run, golden)
            else:
                _compare_exact(diff, name, run, golden)
    for name in sorted(run_files - golden_files):
        diff.warnings.append(f"{name}: extra file in run directory")
    return diff


@dataclass
class RunOutcome:
    result: ExperimentResult
    output_dir: Path
    diff: GoldenDiff | None
    timings: dict[str, float]

    @property
    def exit_code(self) -> int:
        return 0 if self.diff is None or self.diff.ok else 1


def _summary(cfg: ExperimentConfig, res: ExperimentResult, timings: dict, diff: GoldenDiff | None) -> str:
    ok = sum(r.status == "ok" for r in res.rows)
    lines = [f"experiment: {cfg.experiment}",
             f"rows: {len(res.rows)} ({ok} ok, {len(res.rows) - ok} flagged)"]
    if res.constants:
        lines.append("constants:")
        lines.extend(f"  {k} = {_format(v)}" for k, v in sorted(res.constants.items()))
    if res.checks:
        lines.append("checks:")
        lines.extend(f"  {'PASS' if v else 'FAIL'} {k}" for k, v in sorted(res.checks.items()))
    flagged = [r for r in res.rows if r.status != "ok"]
    if flagged:
        lines.append("flagged rows:")
        for r in flagged[:20]:
            lines.append(f"  {r.family} N={r.N} J={r.J} seed={r.seed}: {'; '.join(r.notes)}")
        if len(flagged) > 20:
            lines.append(f"  ... {len(flagged) - 20} more")
    if diff is not None:
        lines.append("golden comparison:")
        lines.extend("  " + ln for ln in diff.text().splitlines())
    lines.append("timings (s):")
    lines.extend(f"  {k}: {v:.3f}" for k, v in timings.items())
    return "\n".join(lines) + "\n"


def resolve_paths(cfg: ExperimentConfig, output_dir=None, golden_dir=None) -> tuple[Path, Path | None]:
    """CLI arguments win over config values; relative config paths are taken from the config's folder."""
    base = Path(cfg.source).parent if cfg.source else Path.cwd()

    def rel(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    out = Path(output_dir) if output_dir else rel(cfg.output_dir) if cfg.output_dir else Path("runs") / cfg.experiment
    gold = Path(golden_dir) if golden_dir else rel(cfg.golden) if cfg.golden else None
    return out, gold


def execute(cfg: ExperimentConfig) -> tuple[ExperimentResult, float]:
    t0 = time.perf_counter()
    res = REGISTRY[cfg.experiment].run(cfg)
    return res, time.perf_counter() - t0


def write_run(cfg: ExperimentConfig, res: ExperimentResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows = sorted(res.rows, key=lambda r: (r.family, r.N, r.seed, r.J, _nan_key(r.s), _nan_key(r.q),
                                          _nan_key(r.r)))
    _write_atomic(out / "config.echo", cfg.echo())
    _write_atomic(out / "rows.csv", rows_csv(rows))
    _write_atomic(out / "report.json", _dumps({"experiment": cfg.experiment,
                                                "rows": [r.as_dict() for r in rows],
                                                "reports": res.reports}))
    _write_atomic(out / "constants.json", _dumps(res.constants))
    _write_atomic(out / EXACT_DIR / "exact.json", _dumps(res.checks))
    if res.plot is not None:
        _write_atomic(out / "plot.dat", res.plot)


def _nan_key(v: float) -> float:
    return -math.inf if math.isnan(v) else v


def run(cfg: ExperimentConfig, output_dir=None, golden_dir=None) -> RunOutcome:
    """Execute one experiment, write its artifacts and compare with the golden directory if given."""
    out, gold = resolve_paths(cfg, output_dir, golden_dir)
    res, elapsed = execute(cfg)
    t1 = time.perf_counter()
    write_run(cfg, res, out)
    timings = {"compute": elapsed, "write": time.perf_counter() - t1}
    diff = compare_golden(out, gold) if gold is not None else None
    _write_atomic(out / "summary.txt", _summary(cfg, res, timings, diff))
    return RunOutcome(res, out, diff, timings)
