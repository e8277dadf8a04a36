"""Euler pressure, the bilinear pressure operator, paraproducts and div-curl functionals.

Sign conventions: `pressure` returns p with -Lap p = sum_{k,l} d_k d_l (u_k u_l),
i.e. p = -sum R_lk(u_l u_k) where R_lk has symbol xi_l xi_k / |xi|^2.
`bilinear_pressure(f, g)` is sum R_lk(f_l g_k), so bilinear_pressure(u, u) = -pressure(u).
"""
from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import MeanRemovedWarning, SolenoidalityError, StructureError
from .fields import (
    RealField,
    VectorField,
    _derivative_symbol,
    _unit,
    curl_defect,
    divergence_defect,
    product,
    product_spectrum,
    radius_symbol,
)
from .lp import BlockRange, HomogeneousSymbol, _resolve, apply_symbol, block_symbol, fractional_laplacian, low_symbol, riesz_double_symbol
from .norms import _lq, _magnitude, hardy_norm

SOLENOIDAL_TOL = 1e-8
STRUCTURE_TOL = 1e-8
MEAN_TOL = 1e-12


class PressureFormula(enum.Enum):
    DIV_OF_ADVECTION = "div_of_advection"
    DOUBLE_DIVERGENCE = "double_divergence"
    GRADIENT_CONTRACTION = "gradient_contraction"


def _check_solenoidal(u: VectorField) -> None:
    defect = divergence_defect(u)
    if defect > SOLENOIDAL_TOL:
        raise SolenoidalityError(defect)


def _inverse_neg_laplacian(grid, spec: np.ndarray) -> np.ndarray:
    r = radius_symbol(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(r > 0, 1.0 / np.where(r > 0, r * r, 1.0), 0.0)
    return spec * inv


def _d(grid, axis):
    return _derivative_symbol(grid, _unit(grid.dim, axis))


def pressure_source_spectrum(u: VectorField, formula: PressureFormula = PressureFormula.DOUBLE_DIVERGENCE,
                             dealias: bool = True) -> np.ndarray:
    """Half spectrum of -Lap p: div((u.grad)u), sum d_k d_l(u_k u_l) or sum (d_k u_l)(d_l u_k)."""
    grid = u.grid
    n = grid.dim
    total = np.zeros(grid.spectral_shape, dtype=np.complex128)
    if formula is PressureFormula.DOUBLE_DIVERGENCE:
        for k in range(n):
            for l in range(k, n):
                w = 1.0 if k == l else 2.0
                total += w * _d(grid, k) * _d(grid, l) * product_spectrum(u[k], u[l], dealias)
    elif formula is PressureFormula.DIV_OF_ADVECTION:
        du = [[RealField.from_spectrum(grid, _d(grid, k) * u[i].spectrum) for k in range(n)] for i in range(n)]
        for i in range(n):
            adv = sum(product_spectrum(u[k], du[i][k], dealias) for k in range(n))
            total += _d(grid, i) * adv
    elif formula is PressureFormula.GRADIENT_CONTRACTION:
        du = [[RealField.from_spectrum(grid, _d(grid, k) * u[l].spectrum) for l in range(n)] for k in range(n)]
        for k in range(n):
            for l in range(n):
                total += product_spectrum(du[k][l], du[l][k], dealias)
    else:
        raise ValueError(f"unknown formula {formula}")
    return total


def pressure(u: VectorField, formula: PressureFormula = PressureFormula.DOUBLE_DIVERGENCE,
             dealias: bool = True) -> RealField:
    """Zero-mean p with -Lap p equal to the chosen right-hand side.

    The three formulas differ only in how the quadratic source is written:
    div((u.grad)u), sum d_k d_l(u_k u_l) and sum (d_k u_l)(d_l u_k); they agree
    for divergence-free input.
    """
    formula = PressureFormula(formula)
    _check_solenoidal(u)
    spec = pressure_source_spectrum(u, formula, dealias)
    return RealField.from_spectrum(u.grid, _inverse_neg_laplacian(u.grid, spec))


def bilinear_pressure(f: VectorField, g: VectorField, dealias: bool = True) -> RealField:
    """sum_{l,k} R_lk (f_l g_k); equals -pressure(u) when f = g = u."""
    _check_solenoidal(f)
    _check_solenoidal(g)
    grid = f.grid
    total = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for l in range(grid.dim):
        for k in range(grid.dim):
            total += riesz_double_symbol(grid, l, k) * product_spectrum(f[l], g[k], dealias)
    return RealField.from_spectrum(grid, total)


# --------------------------------------------------------------------------
# paraproducts

@dataclass(frozen=True)
class ParaproductTriple:
    low_high: RealField
    high_low: RealField
    diagonal: RealField
    residue: RealField

    def total(self) -> RealField:
        return self.low_high + self.high_low + self.diagonal


def _pieces(f: RealField, rng: BlockRange):
    grid = f.grid
    blocks = {j: RealField.from_spectrum(grid, f.spectrum * block_symbol(grid, j))
              for j in range(rng.j_min - 1, rng.j_max + 2)}
    lows = {j: RealField.from_spectrum(grid, f.spectrum * low_symbol(grid, j - 2)) for j in rng}
    return blocks, lows


def paraproduct_split(f: RealField, g: RealField, rng: BlockRange | None = None,
                      dealias: bool = True) -> ParaproductTriple:
    """Low-high, high-low and diagonal sums over the block range.

    residue = fg - (low_high + high_low + diagonal) collects what the finite
    range misses (the product of means and any energy outside the range).
    """
    grid = f.grid
    rng = _resolve(grid, rng)
    fb, fl = _pieces(f, rng)
    gb, gl = _pieces(g, rng)
    shape = grid.spectral_shape
    a = np.zeros(shape, dtype=np.complex128)
    b = np.zeros(shape, dtype=np.complex128)
    c = np.zeros(shape, dtype=np.complex128)
    for j in rng:
        a += product_spectrum(fl[j], gb[j], dealias)
        b += product_spectrum(fb[j], gl[j], dealias)
        wide = RealField.from_spectrum(grid, fb[j - 1].spectrum + fb[j].spectrum + fb[j + 1].spectrum)
        c += product_spectrum(wide, gb[j], dealias)
    full = product_spectrum(f, g, dealias)
    mk = lambda s: RealField.from_spectrum(grid, s)  # noqa: E731
    return ParaproductTriple(mk(a), mk(b), mk(c), mk(full - a - b - c))


def pressure_paraproduct(u: VectorField, rng: BlockRange | None = None, dealias: bool = True) -> ParaproductTriple:
    """Paraproduct pieces of p = -sum R_lk(u_l u_k), piece by piece."""
    grid = u.grid
    parts = [np.zeros(grid.spectral_shape, dtype=np.complex128) for _ in range(4)]
    for l in range(grid.dim):
        for k in range(grid.dim):
            t = paraproduct_split(u[l], u[k], rng, dealias)
            m = -riesz_double_symbol(grid, l, k)
            for acc, piece in zip(parts, (t.low_high, t.high_low, t.diagonal, t.residue)):
                acc += m * piece.spectrum
    return ParaproductTriple(*(RealField.from_spectrum(grid, s) for s in parts))


def leibniz_residual(f: RealField, g: RealField, A: HomogeneousSymbol, rng: BlockRange | None = None,
                     dealias: bool = True) -> RealField:
    """A(fg) - sum_j A(f_{<=j-2} g_j) - sum_j A(f_j g_{<=j-2})."""
    if not A.degree > 0:
        raise ValueError("leibniz_residual needs a symbol of positive degree")
    grid = f.grid
    rng = _resolve(grid, rng)
    fb, fl = _pieces(f, rng)
    gb, gl = _pieces(g, rng)
    out = apply_symbol(product(f, g, dealias), A)
    for j in rng:
        out = out - apply_symbol(product(fl[j], gb[j], dealias), A)
    for j in rng:
        out = out - apply_symbol(product(fb[j], gl[j], dealias), A)
    return out


# --------------------------------------------------------------------------
# div-curl

def conjugate_exponent(p: float) -> float:
    p = float(p)
    return p / (p - 1.0)


def _check_divcurl(f: VectorField, g: VectorField, s: float) -> None:
    if f.grid.dim != 3 or g.grid.dim != 3:
        raise ValueError("the div-curl functional is defined for n = 3")
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    if not s > -1.0:
        raise ValueError(f"s must exceed -1, got {s}")
    df = divergence_defect(f)
    if df > STRUCTURE_TOL:
        raise StructureError(f"f is not divergence free (defect {df:.3e})")
    cg = curl_defect(g)
    if cg > STRUCTURE_TOL:
        raise StructureError(f"g is not curl free (defect {cg:.3e})")


def divcurl_lhs(f: VectorField, g: VectorField, s: float, dealias: bool = True) -> float:
    """|| |grad|^s (f.g) ||_{H^1}; for s <= 0 the mean of f.g is removed and reported."""
    return divcurl_lhs_values(f, g, [s], dealias)[0]


def divcurl_lhs_values(f: VectorField, g: VectorField, s_values, dealias: bool = True) -> list[float]:
    """divcurl_lhs for several s, forming the product f.g once."""
    s_values = [float(s) for s in s_values]
    for s in s_values:
        _check_divcurl(f, g, s)
    if not s_values:
        return []
    fg = f.dot(g, dealias)
    mean = fg.mean()
    out = []
    for s in s_values:
        h = fg
        if s <= 0:
            if abs(mean) > MEAN_TOL * math.sqrt(fg.mean_square()):
                warnings.warn(f"divcurl_lhs removed mean {mean:.3e}", MeanRemovedWarning, stacklevel=3)
            h = fg - mean
        out.append(hardy_norm(h) if s == 0 else hardy_norm(fractional_laplacian(h, s)))
    return out


@dataclass(frozen=True)
class DivCurlBound:
    sum_form: float
    min_form: float

    def select(self, s: float) -> float:
        return self.sum_form if s > 0 else self.min_form


def divcurl_rhs(f: VectorField, g: VectorField, s: float, p1: float, p2: float) -> DivCurlBound:
    """Sum form ||D^s f||_{p1} ||g||_{p1'} + ||f||_{p2'} ||D^s g||_{p2} and its min form."""
    return divcurl_bounds(f, g, s, [(p1, p2)])[(float(p1), float(p2))]


def divcurl_bounds(f: VectorField, g: VectorField, s: float, pairs) -> dict[tuple[float, float], DivCurlBound]:
    """divcurl_rhs for several (p1, p2) pairs, applying |grad|^s to f and g once."""
    pairs = [(float(p1), float(p2)) for p1, p2 in pairs]
    for p in itertools.chain.from_iterable(pairs):
        if not 1.0 < p < math.inf:
            raise ValueError(f"exponents must lie in (1, inf), got {p}")
    mags = [_magnitude([c.samples for c in h])
            for h in (fractional_laplacian(f, s), g, f, fractional_laplacian(g, s))]
    out = {}
    for p1, p2 in pairs:
        first = _lq(mags[0], p1) * _lq(mags[1], conjugate_exponent(p1))
        second = _lq(mags[2], conjugate_exponent(p2)) * _lq(mags[3], p2)
        out[(p1, p2)] = DivCurlBound(first + second, min(first, second))
    return out
