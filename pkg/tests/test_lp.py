import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcal import (
    BlockRange,
    DomainError,
    DyadicProfile,
    Grid,
    HomogeneousSymbol,
    RangeError,
    RealField,
    apply_symbol,
    fattened_block,
    fractional_laplacian,
    project_block,
    project_high,
    project_low,
    riesz_double,
)
from pcal.fields import derivative
from pcal.lp import annulus, low_pass
from pcal.norms import lebesgue_norm
from pcal.random_fields import random_scalar

from oracles import multiplier_oracle


def cos_field(grid, k, axis=0):
    return RealField.from_function(grid, lambda *x: np.cos(k * x[axis]) + 0 * sum(x))


# ---- profile


def test_profile_plateau_and_support():
    t = np.linspace(0, 3, 30001)
    lp_, an = low_pass(t), annulus(t)
    assert np.all(lp_[t <= 1] == 1) and np.all(lp_[t >= 7 / 6] == 0)
    assert np.all(an[(t < 0.5) | (t > 7 / 6)] == 0)
    assert np.all((lp_ >= 0) & (lp_ <= 1))
    assert np.all(np.diff(lp_) <= 0)


def test_profile_partition_of_unity():
    t = np.logspace(-6, 6, 4001)
    total = sum(annulus(2.0 ** -j * t) for j in range(-40, 41))
    assert np.abs(total - 1).max() < 1e-10


def test_profile_csv_export():
    text = DyadicProfile().to_csv(2.0, 5)
    lines = text.strip().splitlines()
    assert lines[0] == "t,low_pass,annulus"
    assert len(lines) == 6
    assert [float(v) for v in lines[1].split(",")] == [0.0, 1.0, 0.0]


# ---- block range


@pytest.mark.parametrize("N", [8, 64, 256, 4096])
def test_block_range_respects_nyquist(N):
    g = Grid(2, N)
    rng = BlockRange.for_grid(g)
    assert 2.0 ** rng.j_max * 7 / 6 <= g.nyquist
    assert 2.0 ** (rng.j_max + 1) * 7 / 6 > g.nyquist
    # lowest block whose annulus reaches the first lattice frequency
    assert 2.0 ** rng.j_min * 7 / 6 >= g.fundamental
    assert 2.0 ** (rng.j_min - 1) * 7 / 6 < g.fundamental


def test_block_out_of_range_is_an_error():
    g = Grid(1, 64)
    f = cos_field(g, 3)
    rng = BlockRange.for_grid(g)
    for j in (rng.j_max + 1, rng.j_min - 1):
        with pytest.raises(RangeError):
            project_block(f, j)
        with pytest.raises(RangeError):
            project_low(f, j)
    with pytest.raises(RangeError):
        project_block(f, 2, BlockRange(0, 10))


# ---- projections


def test_project_block_examples():
    g = Grid(2, 64)
    f = cos_field(g, 4)
    assert np.abs(project_block(f, 2).samples - f.samples).max() < 1e-12
    assert np.abs(project_block(f, 4).samples).max() < 1e-12
    g = Grid(2, 128)
    assert np.abs(project_block(cos_field(g, 4), 5).samples).max() < 1e-12


def test_project_low_examples():
    g = Grid(2, 256)
    f = random_scalar(g, 2, band=20)
    top = BlockRange.for_grid(g).j_max
    assert np.abs(project_low(f, top).samples - f.samples).max() < 1e-12
    assert np.abs(project_low(cos_field(g, 64), 1).samples).max() < 1e-12
    for j in range(0, 6):
        both = project_low(f, j).samples + project_high(f, j).samples
        assert np.abs(both - f.samples).max() < 1e-12


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_partition_reconstruction(dim):
    N = {1: 256, 2: 64, 3: 32}[dim]
    g = Grid(dim, N)
    rng = BlockRange.for_grid(g)
    # the blocks telescope to the low-pass at j_max, exact on its plateau
    f = random_scalar(g, 40 + dim, band=2 ** rng.j_max, beta=0.5)
    total = project_low(f, rng.j_min - 1, BlockRange(rng.j_min - 1, rng.j_max)).samples.copy()
    for j in rng:
        total += project_block(f, j).samples
    rms = math.sqrt(f.mean_square())
    assert math.sqrt(np.mean((total - f.samples) ** 2)) <= 1e-10 * rms


def test_projection_supports_on_lattice():
    g = Grid(2, 128)
    f = random_scalar(g, 3, band=60, beta=0.0)
    r = np.sqrt(sum(k * k for k in np.broadcast_arrays(*g.frequencies())))
    for j in range(0, 6):
        spec = project_block(f, j).spectrum
        live = np.abs(spec) > 1e-9 * np.abs(f.spectrum).max()
        assert np.all(r[live] >= 2.0 ** (j - 1) - 1e-12)
        assert np.all(r[live] <= 7 / 6 * 2.0 ** j + 1e-12)


def test_almost_orthogonality_is_exact():
    g = Grid(2, 128)
    f = random_scalar(g, 4, band=60, beta=0.0)
    for j in range(0, 6):
        for jj in range(0, 6):
            if abs(j - jj) > 1:
                assert np.all(project_block(project_block(f, j), jj).spectrum == 0)


def test_projection_matches_direct_oracle():
    rng = np.random.default_rng(3)
    g = Grid(2, 8)
    f = RealField(g, rng.standard_normal(g.shape))
    sym = lambda a, b: annulus(np.sqrt(a * a + b * b) / 2.0)  # noqa: E731
    assert np.abs(project_block(f, 1).samples - multiplier_oracle(f.samples, sym)).max() < 1e-12
    sym = lambda a, b: low_pass(np.sqrt(a * a + b * b))  # noqa: E731
    assert np.abs(project_low(f, 0).samples - multiplier_oracle(f.samples, sym)).max() < 1e-12


def test_fattened_block_window():
    g = Grid(1, 256)
    f = random_scalar(g, 5, band=100, beta=0.0)
    three = sum(project_block(f, j).samples for j in (3, 4, 5))
    assert np.abs(fattened_block(f, 4).samples - three).max() < 1e-12
    five = three + project_block(f, 2).samples + project_block(f, 6).samples
    assert np.abs(fattened_block(f, 4, (2, 2)).samples - five).max() < 1e-12


# ---- fractional laplacian


def test_fractional_laplacian_eigenfunctions():
    g = Grid(2, 64)
    c1 = cos_field(g, 1)
    assert np.abs(fractional_laplacian(c1, 2).samples - c1.samples).max() < 1e-12
    c2 = cos_field(g, 2, axis=1)
    for s in (-1.5, -0.5, 0.3, 1.0, 2.5):
        assert np.abs(fractional_laplacian(c2, s).samples - 2 ** s * c2.samples).max() < 1e-12 * 2 ** s


def test_fractional_laplacian_zero_order_removes_mean():
    g = Grid(2, 32)
    f = random_scalar(g, 6, zero_mean=False)
    out = fractional_laplacian(f, 0)
    assert abs(out.mean()) < 1e-14
    assert np.abs(out.samples - (f.samples - f.mean())).max() < 1e-14


def test_fractional_laplacian_negative_needs_zero_mean():
    g = Grid(2, 32)
    with pytest.raises(DomainError):
        fractional_laplacian(random_scalar(g, 6, zero_mean=False) + 1.0, -0.5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 3.0), st.integers(0, 10**6))
def test_fractional_laplacian_inverse_pair(s, seed):
    g = Grid(2, 32)
    f = random_scalar(g, seed, band=12, zero_mean=False)
    back = fractional_laplacian(fractional_laplacian(f - f.mean(), -s), s)
    assert np.abs(back.samples - (f.samples - f.mean())).max() < 1e-10 * np.abs(f.samples).max()


# ---- riesz


def test_riesz_examples():
    g = Grid(2, 32)
    c = cos_field(g, 1)
    assert np.abs(riesz_double(c, 0, 0).samples - c.samples).max() < 1e-12
    assert np.abs(riesz_double(c, 0, 1).samples).max() < 1e-12
    with pytest.raises(ValueError):
        riesz_double(c, 0, 2)


@pytest.mark.parametrize("dim", [2, 3])
def test_riesz_trace_is_identity_minus_mean(dim):
    g = Grid(dim, 16)
    f = random_scalar(g, 7, band=6, zero_mean=False)
    total = sum(riesz_double(f, l, l).samples for l in range(dim))
    assert np.abs(total - (f.samples - f.mean())).max() < 1e-12


def test_riesz_matches_direct_oracle():
    rng = np.random.default_rng(13)
    g = Grid(2, 8)
    f = RealField(g, rng.standard_normal(g.shape))

    def sym(a, b):
        r2 = a * a + b * b
        return np.where(r2 > 0, a * b / np.where(r2 > 0, r2, 1), 0.0)

    assert np.abs(riesz_double(f, 0, 1).samples - multiplier_oracle(f.samples, sym)).max() < 1e-12


# ---- homogeneous symbols


def test_apply_symbol_radial_matches_fractional_laplacian():
    g = Grid(2, 64)
    f = random_scalar(g, 8)
    for s in (-0.7, 0.5, 1.3):
        A = HomogeneousSymbol(s)
        assert np.abs(apply_symbol(f, A).samples - fractional_laplacian(f, s).samples).max() < 1e-12
    zero = apply_symbol(f + 2.0, HomogeneousSymbol(0.0))
    assert np.abs(zero.samples - f.samples).max() < 1e-12


def test_apply_symbol_odd_angular_part():
    g = Grid(2, 32)
    A = HomogeneousSymbol(0.0, lambda w: 1j * w[0], "i xi1/|xi|")
    out = apply_symbol(cos_field(g, 1), A)
    assert np.abs(out.samples + np.sin(g.coordinates()[0])).max() < 1e-12


def test_apply_symbol_degree_two_is_minus_laplacian():
    g = Grid(2, 64)
    f = random_scalar(g, 9, band=20)
    lap = derivative(f, (2, 0)).samples + derivative(f, (0, 2)).samples
    assert np.abs(apply_symbol(f, HomogeneousSymbol(2.0)).samples + lap).max() < 1e-12 * np.abs(lap).max()


# ---- Bernstein-type comparisons


@pytest.mark.parametrize("q", [2.0, math.inf])
@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_block_norm_vs_fractional_derivative(s, q):
    g = Grid(2, 128)
    f = random_scalar(g, 10, band=60, beta=0.5)
    for j in BlockRange.for_grid(g):
        pj = project_block(f, j)
        a = lebesgue_norm(pj, q)
        if a < 1e-12:
            continue
        b = 2.0 ** (-j * s) * lebesgue_norm(fractional_laplacian(pj, s), q)
        assert 1 / 3 <= a / b <= 3
