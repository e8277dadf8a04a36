import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcal import (
    BlockRange,
    Grid,
    HomogeneousSymbol,
    MeanRemovedWarning,
    PressureFormula,
    RealField,
    SolenoidalityError,
    StructureError,
    VectorField,
    bilinear_pressure,
    divcurl_lhs,
    divcurl_rhs,
    fractional_laplacian,
    hardy_norm,
    leibniz_residual,
    lebesgue_norm,
    paraproduct_split,
    perp_gradient,
    pressure,
)
from pcal.experiments import taylor_green_pressure, taylor_green_velocity
from pcal.fields import derivative, gradient, product
from pcal.lp import apply_symbol
from pcal.pressure import conjugate_exponent, divcurl_bounds, divcurl_lhs_values, pressure_source_spectrum
from pcal.random_fields import derive_seed, random_gradient, random_scalar, random_solenoidal


def rel_l2(a: RealField, b: RealField) -> float:
    scale = max(math.sqrt(a.mean_square()), math.sqrt(b.mean_square()), 1e-300)
    return math.sqrt((a - b).mean_square()) / scale


# ---- pressure


def test_shear_flow_has_zero_pressure():
    g = Grid(2, 64)
    u = VectorField(g, (RealField.from_function(g, lambda x, y: np.sin(y) + 0 * x), RealField.zeros(g)))
    for formula in PressureFormula:
        assert np.abs(pressure(u, formula).samples).max() < 1e-12


@pytest.mark.parametrize("formula", list(PressureFormula))
def test_taylor_green_pressure(formula):
    g = Grid(2, 256)
    p = pressure(taylor_green_velocity(g), formula)
    assert np.abs(p.samples - taylor_green_pressure(g).samples).max() < 1e-10


@pytest.mark.parametrize("dim", [2, 3])
def test_formulas_agree_on_random_fields(dim):
    g = Grid(dim, 64 if dim == 2 else 32)
    for i in range(5):
        u = random_solenoidal(g, derive_seed(31, i), band=6 if dim == 3 else 10)
        ps = [pressure(u, f) for f in PressureFormula]
        for a in ps:
            for b in ps:
                assert rel_l2(a, b) < 1e-10


def test_pressure_solves_poisson():
    g = Grid(2, 64)
    u = random_solenoidal(g, 32, band=10)
    p = pressure(u)
    lap = derivative(p, (2, 0)) + derivative(p, (0, 2))
    src = RealField.from_spectrum(g, pressure_source_spectrum(u))
    assert rel_l2(-lap, src) < 1e-10
    assert abs(p.mean()) < 1e-14


def test_pressure_rejects_compressible_input():
    g = Grid(2, 32)
    u = VectorField(g, (RealField.from_function(g, lambda x, y: np.sin(x) + 0 * y), RealField.zeros(g)))
    with pytest.raises(SolenoidalityError) as info:
        pressure(u)
    assert info.value.defect > 0.1


# ---- bilinear operator


def test_bilinear_examples():
    g = Grid(2, 64)
    u = random_solenoidal(g, 33, band=10)
    zero = VectorField(g, (RealField.zeros(g), RealField.zeros(g)))
    assert np.all(bilinear_pressure(u, zero).samples == 0)
    assert np.abs(bilinear_pressure(u, u).samples + pressure(u).samples).max() < 1e-12


def test_bilinear_symmetrized_swap():
    g = Grid(2, 64)
    f = random_solenoidal(g, 34, band=10)
    h = random_solenoidal(g, 35, band=10)
    a = bilinear_pressure(f, h) + bilinear_pressure(h, f)
    b = bilinear_pressure(h, f) + bilinear_pressure(f, h)
    assert np.array_equal(a.samples, b.samples)
    # and the two orders agree because R_lk is symmetric in (l, k)
    assert rel_l2(bilinear_pressure(f, h), bilinear_pressure(h, f)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.integers(0, 10**6))
def test_bilinear_linearity(alpha, seed):
    g = Grid(2, 32)
    f = random_solenoidal(g, derive_seed(seed, 0), band=6)
    f2 = random_solenoidal(g, derive_seed(seed, 1), band=6)
    h = random_solenoidal(g, derive_seed(seed, 2), band=6)
    lhs = bilinear_pressure(alpha * f + f2, h)
    rhs = alpha * bilinear_pressure(f, h) + bilinear_pressure(f2, h)
    assert np.abs(lhs.samples - rhs.samples).max() < 1e-12 * max(1.0, abs(alpha))


# ---- paraproducts


def test_paraproduct_low_high_support():
    g = Grid(1, 512)
    x = g.coordinates()[0]
    f = RealField(g, np.cos(2 * x))    # block 1
    h = RealField(g, np.cos(64 * x))   # block 6
    t = paraproduct_split(f, h)
    assert np.abs(t.high_low.samples).max() < 1e-12
    assert np.abs(t.diagonal.samples).max() < 1e-12
    assert rel_l2(t.low_high, product(f, h)) < 1e-12


def test_paraproduct_diagonal_support():
    g = Grid(1, 512)
    f = RealField(g, np.cos(32 * g.coordinates()[0]))
    t = paraproduct_split(f, f)
    assert np.abs(t.low_high.samples).max() < 1e-12
    assert np.abs(t.high_low.samples).max() < 1e-12
    assert rel_l2(t.diagonal, product(f, f)) < 1e-12


def test_paraproduct_reassembly_random_pairs():
    # zero-mean fields inside the block range: the three sums alone rebuild fg
    g = Grid(2, 32)
    band = 2 ** BlockRange.for_grid(g).j_max
    worst = 0.0
    for i in range(100):
        f = random_scalar(g, derive_seed(36, 2 * i), band=band)
        h = random_scalar(g, derive_seed(36, 2 * i + 1), band=band)
        t = paraproduct_split(f, h)
        worst = max(worst, rel_l2(t.total(), product(f, h)))
    assert worst <= 1e-10


def test_leibniz_residual_examples():
    g = Grid(1, 512)
    x = g.coordinates()[0]
    A = HomogeneousSymbol(1.5)
    low, high = RealField(g, np.cos(2 * x)), RealField(g, np.cos(64 * x))
    assert np.abs(leibniz_residual(low, high, A).samples).max() < 1e-10
    assert np.all(leibniz_residual(low, RealField.zeros(g), A).samples == 0)
    f = RealField(g, np.cos(32 * x))
    t = paraproduct_split(f, f)
    direct = apply_symbol(t.diagonal + t.residue, A)
    assert np.abs(leibniz_residual(f, f, A).samples - direct.samples).max() < 1e-10
    with pytest.raises(ValueError):
        leibniz_residual(f, f, HomogeneousSymbol(0.0))


# ---- div-curl


def divcurl_pair(seed, N=32, band=6):
    g = Grid(3, N)
    return random_solenoidal(g, derive_seed(seed, 0), band), random_gradient(g, derive_seed(seed, 1), band)


def test_divcurl_zero_f():
    f, h = divcurl_pair(40)
    zero = VectorField(f.grid, tuple(RealField.zeros(f.grid) for _ in range(3)))
    assert divcurl_lhs(zero, h, 0.5) == 0
    b = divcurl_rhs(zero, h, 0.5, 2, 2)
    assert b.sum_form == 0 and b.min_form == 0


def test_divcurl_lhs_definition():
    f, h = divcurl_pair(41)
    fg = f.dot(h)
    for s in (0.5, 1.0):
        assert divcurl_lhs(f, h, s) == hardy_norm(fractional_laplacian(fg, s))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MeanRemovedWarning)
        assert divcurl_lhs(f, h, 0.0) == hardy_norm(fg - fg.mean())
        assert divcurl_lhs_values(f, h, [0.0, 0.5]) == [divcurl_lhs(f, h, 0.0), divcurl_lhs(f, h, 0.5)]


def test_divcurl_single_modes():
    g = Grid(3, 32)
    x, y, z = g.coordinates()
    a = VectorField(g, (RealField.zeros(g), RealField.zeros(g), RealField(g, np.cos(2 * y) + 0 * x + 0 * z)))
    f = VectorField(g, tuple(a), solenoidal=True)  # (0, 0, cos 2y) has zero divergence
    psi = RealField(g, np.sin(3 * z) + 0 * x + 0 * y)
    h = gradient(psi)
    fg = RealField(g, 3 * np.cos(2 * y) * np.cos(3 * z) + 0 * x)
    assert divcurl_lhs(f, h, 0.5) == pytest.approx(hardy_norm(fractional_laplacian(fg, 0.5)), rel=1e-12)


def test_divcurl_rhs_assembly():
    f, h = divcurl_pair(42)
    for s in (-0.5, 0.5, 1.0):
        b = divcurl_rhs(f, h, s, 2, 2)
        first = lebesgue_norm(fractional_laplacian(f, s), 2) * lebesgue_norm(h, 2)
        second = lebesgue_norm(f, 2) * lebesgue_norm(fractional_laplacian(h, s), 2)
        assert b.sum_form == pytest.approx(first + second, rel=1e-14)
        assert b.min_form == pytest.approx(min(first, second), rel=1e-14)
        assert b.select(s) == (b.sum_form if s > 0 else b.min_form)


def test_divcurl_rhs_homogeneity():
    f, h = divcurl_pair(43)
    b1 = divcurl_rhs(f, h, 0.5, 3, 1.5)
    b2 = divcurl_rhs(2.0 * f, h, 0.5, 3, 1.5)
    assert b2.sum_form == pytest.approx(2 * b1.sum_form, rel=1e-14)
    assert b2.min_form == pytest.approx(2 * b1.min_form, rel=1e-14)
    assert divcurl_bounds(f, h, 0.5, [(3, 1.5)])[(3.0, 1.5)] == b1


def test_divcurl_structure_errors():
    f, h = divcurl_pair(44)
    with pytest.raises(StructureError):
        divcurl_lhs(h, h, 0.5)
    with pytest.raises(StructureError):
        divcurl_lhs(f, f, 0.5)
    with pytest.raises(ValueError):
        divcurl_lhs(f, h, -1.0)
    g2 = Grid(2, 32)
    u = perp_gradient(random_scalar(g2, 1, band=6))
    with pytest.raises(ValueError):
        divcurl_lhs(u, u, 0.5)
    with pytest.raises(ValueError):
        divcurl_rhs(f, h, 0.5, 1.0, 2.0)


def test_conjugate_exponent():
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(3) == 1.5
    assert conjugate_exponent(1.5) == pytest.approx(3)
