"""End-to-end acceptance checks, one test per criterion.

Each criterion runs its shipped config(s) against the stored goldens and
within its time budget.  A PASS/FAIL line per criterion is printed in the
terminal summary (see conftest.py).  Run alone with

    python -m pytest tests/test_acceptance.py
"""
import math
import re
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from pcal import BlockRange, Grid, RealField, SpectralField, paraproduct_split
from pcal.config import load_config
from pcal.fields import forward_transform, inverse_transform, pointwise_product, product
from pcal.harness import run
from pcal.lp import annulus, low_pass, project_block, project_low
from pcal.random_fields import derive_seed, random_scalar

from oracles import direct_dft, direct_inverse, hermitian_random, multiplier_oracle, sample_loop_product

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def criterion(number, title):
    return pytest.mark.criterion(number, title)


def run_config(name, tmp_path, budget):
    """Run configs/<name>.cfg against golden/<name>, return (outcome, seconds)."""
    cfg = load_config(CONFIGS / f"{name}.cfg")
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        outcome = run(cfg, tmp_path / name)
    elapsed = time.perf_counter() - t0
    assert outcome.diff is not None
    assert outcome.diff.ok, outcome.diff.text()
    assert outcome.exit_code == 0
    assert all(outcome.result.checks.values()), outcome.result.checks
    assert elapsed < budget, f"{name} took {elapsed:.1f} s, budget {budget} s"
    return outcome, elapsed


def constants_by_key(outcome, pattern):
    return {k: v for k, v in outcome.result.constants.items() if re.search(pattern, k)}


@criterion(1, "Taylor-Green pressure error <= 1e-10 at N=256 in < 1 s")
def test_criterion_01_taylor_green(tmp_path):
    out, _ = run_config("taylor_green", tmp_path, 1.0)
    (row,) = out.result.rows
    assert row.N == 256 and row.lhs <= 1e-10


@criterion(2, "three pressure formulas agree to 1e-10 on 100 fields at N=256 in < 1 min")
def test_criterion_02_formula_equivalence(tmp_path):
    out, _ = run_config("formula_equivalence", tmp_path, 60.0)
    rows = out.result.rows
    assert len(rows) == 100 and all(r.N == 256 for r in rows)
    assert max(r.lhs for r in rows) <= 1e-10


@criterion(3, "pressure ratio suites (sob, besov, bes_stronger) within golden +-25% in < 5 min")
def test_criterion_03_pressure_ratios(tmp_path):
    total = 0.0
    for name, families in (("pressure_sobolev", ("sob",)), ("pressure_besov", ("besov", "bes_stronger"))):
        out, dt = run_config(name, tmp_path, 300.0 - total)
        total += dt
        for fam in families:
            consts = constants_by_key(out, rf"^{fam}\[")
            assert consts and all(math.isfinite(v) and v > 0 for v in consts.values())
        assert {r.seed for r in out.result.rows} == set(range(100))


@criterion(4, "Hardy ratio suite incl. d1 d2 variant within golden +-25% in < 3 min")
def test_criterion_04_hardy(tmp_path):
    out, _ = run_config("hardy_ratio", tmp_path, 180.0)
    keys = out.result.constants
    assert any(k.startswith("hardy[") and "s=0.5" in k for k in keys)
    assert any(k.startswith("hardy_d12[") and "s=1" in k for k in keys)
    assert all(math.isfinite(v) for v in keys.values())


@criterion(5, "div-curl suite n=3 N=128, 50 seeds, s in {-0.5, 0, 0.5, 1} within golden +-25% in < 5 min")
def test_criterion_05_divcurl(tmp_path):
    out, _ = run_config("divcurl", tmp_path, 300.0)
    rows = out.result.rows
    assert {r.s for r in rows} == {-0.5, 0.0, 0.5, 1.0}
    assert {r.seed for r in rows} == set(range(50))
    assert all(r.n == 3 and r.N == 128 for r in rows)


@criterion(6, "Hoelder/Besov equivalence interval stable across N=256/512 (n=1,2) in < 3 min")
def test_criterion_06_holder_besov(tmp_path):
    total = 0.0
    for name in ("holder_besov_n1", "holder_besov_n2"):
        out, dt = run_config(name, tmp_path, 180.0 - total)
        total += dt
        for kind in ("upper", "inverse_lower"):
            for alpha in ("0.25", "0.5", "0.75"):
                pair = [v for k, v in constants_by_key(out, rf"^{kind}:").items() if f"s={alpha}," in k]
                assert len(pair) == 2
                assert abs(pair[0] - pair[1]) <= 0.25 * min(pair)


@criterion(7, "Bernstein constants stable +-20% across N=128/256 in < 2 min")
def test_criterion_07_bernstein(tmp_path):
    total = 0.0
    for name in ("bernstein_n1", "bernstein_n2"):
        out, dt = run_config(name, tmp_path, 120.0 - total)
        total += dt
        groups: dict[str, list[float]] = {}
        for k, v in out.result.constants.items():
            groups.setdefault(re.sub(r",N=\d+", "", k), []).append(v)
        assert groups
        for vals in groups.values():
            assert len(vals) == 2 and abs(vals[0] - vals[1]) <= 0.2 * min(vals)


@criterion(8, "s=1 inflation: bounded input, bounded diagonal blocks, growing cross-scale value in < 10 min")
def test_criterion_08_inflate_s1(tmp_path):
    out, _ = run_config("inflate_s1", tmp_path, 600.0)
    checks = out.result.checks
    for key in ("input_norm_bounded", "diagonal_blocks_bounded", "offdiag_point_value_increasing",
                "fitted_slope_positive"):
        assert checks[key]
    assert sorted(r.J for r in out.result.rows if r.J >= 2) == [2, 3, 4, 5]
    assert out.result.constants["fitted_slope"] > 0


@criterion(9, "s=0 inflation: block value at 0 linear in J, slope within 25% of the prediction in < 5 min")
def test_criterion_09_inflate_s0(tmp_path):
    out, _ = run_config("inflate_s0", tmp_path, 300.0)
    c = out.result.constants
    assert abs(c["output_slope"] / c["predicted_slope"] - 1) <= 0.25
    assert {2, 4, 8} <= {r.J for r in out.result.rows}


@criterion(10, "half-Hoelder and C^1 diagonals J-linear to 5%, cross terms within the envelope in < 5 min")
def test_criterion_10_additivity(tmp_path):
    half, dt = run_config("inflate_half_holder", tmp_path, 300.0)
    assert half.result.checks["diagonal_additive"] and half.result.checks["offdiag_within_envelope"]
    c1, _ = run_config("inflate_c1", tmp_path, 300.0 - dt)
    assert c1.result.checks["point_value_additive"]
    for out in (half, c1):
        assert {r.J for r in out.result.rows} >= {1, 2, 3}


@criterion(11, "L^1 failure certificate at k=8 in < 30 s")
def test_criterion_11_l1_failure(tmp_path):
    out, _ = run_config("l1_failure", tmp_path, 30.0)
    (m,) = [d for d in out.result.reports["moments"] if d["k"] == 8]
    assert abs(m["c12"]) <= 1e-12
    assert m["c2"] / m["c1"] > 10
    assert abs(m["c1"] - m["c1_from_moment"]) <= 1e-8 * m["c1"]


@criterion(12, "transforms, products, projections match direct oracles on N=8; paraproduct reassembly in < 1 min")
def test_criterion_12_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    for dim in (1, 2):
        g = Grid(dim, 8)
        a, b = rng.standard_normal(g.shape), rng.standard_normal(g.shape)
        fa = RealField(g, a)
        assert np.abs(forward_transform(fa).coeffs - direct_dft(a)).max() <= 1e-12
        c = hermitian_random(8, dim, rng)
        assert np.abs(inverse_transform(SpectralField(g, c)).samples - direct_inverse(c)).max() <= 1e-12
        assert np.abs(pointwise_product(fa, RealField(g, b)).samples - sample_loop_product(a, b)).max() <= 1e-12
        radius = lambda *k: np.sqrt(sum(v * v for v in k))  # noqa: E731
        block = multiplier_oracle(a, lambda *k: annulus(radius(*k) / 2.0))
        assert np.abs(project_block(fa, 1).samples - block).max() <= 1e-12
        low = multiplier_oracle(a, lambda *k: low_pass(radius(*k)))
        assert np.abs(project_low(fa, 0).samples - low).max() <= 1e-12

    g = Grid(2, 32)
    band = 2 ** BlockRange.for_grid(g).j_max
    worst = 0.0
    for i in range(100):
        f = random_scalar(g, derive_seed(12, 2 * i), band=band)
        h = random_scalar(g, derive_seed(12, 2 * i + 1), band=band)
        fh = product(f, h)
        defect = paraproduct_split(f, h).total() - fh
        worst = max(worst, math.sqrt(defect.mean_square()) / math.sqrt(fh.mean_square()))
    assert worst <= 1e-10
    assert time.perf_counter() - t0 < 60.0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
