"""Littlewood-Paley projections and homogeneous Fourier multipliers."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .errors import DomainError, RangeError
from .fields import (
    Grid,
    RealField,
    VectorField,
    apply_multiplier,
    cached_multiplier,
    lattice_symbol,
    radius_symbol,
)

PLATEAU = 1.0
CUTOFF = 7.0 / 6.0
ZERO_MEAN_TOL = 1e-12


def smooth_step(x):
    """C-infinity transition: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)
        b = np.where(x < 1.0, np.exp(-1.0 / np.where(x < 1.0, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def low_pass(t):
    """Radial low-pass profile: 1 on [0, 1], 0 from 7/6 on."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    mid = smooth_step((CUTOFF - t) / (CUTOFF - PLATEAU))
    return np.where(t <= PLATEAU, 1.0, np.where(t >= CUTOFF, 0.0, mid))


def annulus(t):
    """Dyadic annulus profile low_pass(t) - low_pass(2t), supported in [1/2, 7/6]."""
    t = np.asarray(t, dtype=np.float64)
    return low_pass(t) - low_pass(2.0 * t)


@dataclass(frozen=True)
class DyadicProfile:
    """The fixed cutoff pair used by every projection in the package."""

    plateau: float = PLATEAU
    cutoff: float = CUTOFF

    def low_pass(self, t):
        return low_pass(t)

    def annulus(self, t):
        return annulus(t)

    def sample(self, t_max: float = 2.5, count: int = 501) -> np.ndarray:
        t = np.linspace(0.0, t_max, count)
        return np.column_stack([t, low_pass(t), annulus(t)])

    def to_csv(self, t_max: float = 2.5, count: int = 501) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "low_pass", "annulus"])
        for row in self.sample(t_max, count):
            w.writerow([format(v, ".17g") for v in row])
        return buf.getvalue()


@dataclass(frozen=True)
class BlockRange:
    """Admissible dyadic block indices j_min..j_max for a grid."""

    j_min: int
    j_max: int

    def __post_init__(self):
        if self.j_max < self.j_min:
            raise RangeError(f"empty block range [{self.j_min}, {self.j_max}]")

    @classmethod
    def for_grid(cls, grid: Grid) -> "BlockRange":
        j_max = math.floor(math.log2(grid.nyquist / CUTOFF))
        while 2.0 ** (j_max + 1) * CUTOFF <= grid.nyquist:
            j_max += 1
        while 2.0 ** j_max * CUTOFF > grid.nyquist:
            j_max -= 1
        j_min = math.floor(math.log2(grid.fundamental))
        while 2.0 ** j_min < grid.fundamental / 2:
            j_min += 1
        return cls(j_min, j_max)

    def check_grid(self, grid: Grid) -> None:
        if 2.0 ** self.j_max * CUTOFF > grid.nyquist * (1 + 1e-12):
            raise RangeError(f"block {self.j_max} exceeds the Nyquist frequency {grid.nyquist}")
        if 2.0 ** self.j_min < grid.fundamental / 2 * (1 - 1e-12):
            raise RangeError(f"block {self.j_min} lies below the lattice resolution")

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.j_min, self.j_max + 1))

    def __len__(self):
        return self.j_max - self.j_min + 1

    def __contains__(self, j) -> bool:
        return self.j_min <= j <= self.j_max


def block_range(grid: Grid) -> BlockRange:
    return BlockRange.for_grid(grid)


def _resolve(grid: Grid, rng: BlockRange | None) -> BlockRange:
    if rng is None:
        return BlockRange.for_grid(grid)
    rng.check_grid(grid)
    return rng


def _check_block(grid: Grid, j: int, rng: BlockRange | None) -> None:
    rng = _resolve(grid, rng)
    if j not in rng:
        raise RangeError(f"block {j} outside range [{rng.j_min}, {rng.j_max}]")


def block_symbol(grid: Grid, j: int) -> np.ndarray:
    """annulus(2^-j |xi|) on the half lattice; no range check."""
    return cached_multiplier(grid, ("block", j), lambda g: annulus(radius_symbol(g) * 2.0 ** -j))


def low_symbol(grid: Grid, j: int) -> np.ndarray:
    """low_pass(2^-j |xi|) on the half lattice; no range check."""
    return cached_multiplier(grid, ("low", j), lambda g: low_pass(radius_symbol(g) * 2.0 ** -j))


def _map(f, fn):
    if isinstance(f, VectorField):
        return VectorField(f.grid, tuple(fn(c) for c in f))
    return fn(f)


def project_block(f, j: int, rng: BlockRange | None = None):
    """P_j f: spectrum times annulus(2^-j |xi|)."""
    _check_block(f.grid, j, rng)
    m = block_symbol(f.grid, j)
    return _map(f, lambda c: apply_multiplier(c, m))


def project_low(f, j: int, rng: BlockRange | None = None):
    """P_{<=j} f: spectrum times low_pass(2^-j |xi|)."""
    _check_block(f.grid, j, rng)
    m = low_symbol(f.grid, j)
    return _map(f, lambda c: apply_multiplier(c, m))


def project_high(f, j: int, rng: BlockRange | None = None):
    """P_{>j} f = f - P_{<=j} f, as the complementary multiplier."""
    _check_block(f.grid, j, rng)
    m = 1.0 - low_symbol(f.grid, j)
    return _map(f, lambda c: apply_multiplier(c, m))


def fattened_block(f, j: int, window: tuple[int, int] = (1, 1), rng: BlockRange | None = None):
    """P_{j-a} + ... + P_{j+b}; the default window gives P_{j-1} + P_j + P_{j+1}."""
    _check_block(f.grid, j, rng)
    lo, hi = window
    m = sum(block_symbol(f.grid, i) for i in range(j - lo, j + hi + 1))
    return _map(f, lambda c: apply_multiplier(c, m))


def _require_zero_mean(f: RealField) -> None:
    norm = math.sqrt(f.mean_square())
    if abs(f.mean()) > ZERO_MEAN_TOL * norm:
        raise DomainError(f"negative-order multiplier needs a zero-mean field (mean {f.mean():.3e})")


def _power_symbol(grid: Grid, s: float) -> np.ndarray:
    def build(g):
        r = radius_symbol(g)
        with np.errstate(divide="ignore"):
            out = np.where(r > 0, r ** s, 0.0) if s != 0 else np.where(r > 0, 1.0, 0.0)
        return out

    return cached_multiplier(grid, ("power", float(s)), build)


def fractional_laplacian(f, s: float):
    """|grad|^s with symbol |xi|^s and the zero mode sent to 0."""
    s = float(s)

    def one(c):
        if s < 0:
            _require_zero_mean(c)
        if s == 0:
            # symbol is 1 off the origin: only the mean goes
            return c - c.mean()
        return apply_multiplier(c, _power_symbol(c.grid, s))

    return _map(f, one)


def riesz_double_symbol(grid: Grid, l: int, k: int) -> np.ndarray:
    if not (0 <= l < grid.dim and 0 <= k < grid.dim):
        raise ValueError(f"indices ({l}, {k}) out of range for dimension {grid.dim}")

    def build(g):
        def func(xi):
            r2 = sum(x * x for x in np.broadcast_arrays(*xi))
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(r2 > 0, xi[l] * xi[k] / np.where(r2 > 0, r2, 1.0), 0.0)

        return lattice_symbol(g, func)

    return cached_multiplier(grid, ("riesz2", min(l, k), max(l, k)), build)


def riesz_double(f: RealField, l: int, k: int) -> RealField:
    """Multiplier xi_l xi_k / |xi|^2 (zero mode killed)."""
    return apply_multiplier(f, riesz_double_symbol(f.grid, l, k))


@dataclass(frozen=True)
class HomogeneousSymbol:
    """|xi|^degree * angular(xi/|xi|); the zero mode maps to 0."""

    degree: float
    angular: Callable | None = None
    label: str = ""

    def __call__(self, xi: tuple[np.ndarray, ...]) -> np.ndarray:
        xi = np.broadcast_arrays(*xi)
        r = np.sqrt(sum(x * x for x in xi))
        safe = np.where(r > 0, r, 1.0)
        radial = np.where(r > 0, safe ** self.degree, 0.0)
        if self.angular is None:
            return radial
        unit = tuple(x / safe for x in xi)
        return radial * np.asarray(self.angular(unit))

    def on_grid(self, grid: Grid) -> np.ndarray:
        key = ("symbol", self.degree, self.angular, self.label)
        return cached_multiplier(grid, key, lambda g: lattice_symbol(g, self))


def apply_symbol(f, A: HomogeneousSymbol):
    def one(c):
        if A.degree < 0:
            _require_zero_mean(c)
        return apply_multiplier(c, A.on_grid(c.grid))

    return _map(f, one)
