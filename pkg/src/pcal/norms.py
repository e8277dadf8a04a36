"""Function-space norms on periodic fields: Lebesgue, Sobolev, Besov, Hoelder, Hardy."""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .errors import MeanRemovedWarning, TruncationWarning
from .fields import Grid, RealField, VectorField, apply_multiplier, fft_workers, half_weights
from .lp import BlockRange, _resolve, block_symbol, fractional_laplacian, low_symbol

INF = math.inf
TRUNCATION_FLAG = 0.01
HARDY_MEAN_TOL = 1e-12

FAMILIES = ("lebesgue", "sobolev", "besov", "holder", "hardy")


def _components(f) -> list[RealField]:
    if isinstance(f, VectorField):
        return list(f.components)
    return [f]


def _magnitude(arrays: Sequence[np.ndarray]) -> np.ndarray:
    if len(arrays) == 1:
        return np.abs(arrays[0])
    return np.sqrt(sum(a * a for a in arrays))


def _check_exponent(q: float, name: str = "q") -> float:
    q = float(q)
    if not q >= 1.0:
        raise ValueError(f"{name} must lie in [1, inf], got {q}")
    return q


def _lq(mag: np.ndarray, q: float) -> float:
    if q == INF:
        return float(mag.max()) if mag.size else 0.0
    if q == 2.0:
        return math.sqrt(float(np.mean(mag * mag)))
    if q == 1.0:
        return float(np.mean(mag))
    if q == 3.0:
        return float(np.mean(mag * mag * mag)) ** (1.0 / 3.0)
    if q == 1.5:
        return float(np.mean(mag * np.sqrt(mag))) ** (2.0 / 3.0)
    if q == 4.0:
        sq = mag * mag
        return float(np.mean(sq * sq)) ** 0.25
    return float(np.mean(mag ** q)) ** (1.0 / q)


def lebesgue_norm(f, q: float) -> float:
    """Normalized L^q norm (mean over the box); vector fields use the Euclidean magnitude."""
    q = _check_exponent(q)
    return _lq(_magnitude([c.samples for c in _components(f)]), q)


def sobolev_norm(f, s: float, q: float, homogeneous: bool = True) -> float:
    q = _check_exponent(q)
    top = lebesgue_norm(fractional_laplacian(f, s), q)
    if homogeneous:
        return top
    return lebesgue_norm(f, q) + top


def _aggregate(values: Sequence[float], r: float) -> float:
    if not values:
        return 0.0
    if r == INF:
        return max(values)
    total = 0.0
    for v in values:
        total += v ** r
    return total ** (1.0 / r)


@dataclass(frozen=True)
class NormSpec:
    family: str
    s: float = 0.0
    q: float = 2.0
    r: float = 2.0
    homogeneous: bool = True
    range: BlockRange | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}")
        _check_exponent(self.q)
        if self.family == "besov":
            _check_exponent(self.r, "r")

    @classmethod
    def besov(cls, s: float, q: float, r: float, homogeneous: bool = True, range: BlockRange | None = None):
        return cls("besov", float(s), float(q), float(r), homogeneous, range)


@dataclass
class NormReport:
    value: float
    per_block: list[tuple[int, float]] = field(default_factory=list)
    truncation_residue: float = 0.0
    low: float = 0.0
    r: float = INF

    @property
    def flagged(self) -> bool:
        return self.truncation_residue > TRUNCATION_FLAG

    def recompute(self) -> float:
        return self.low + _aggregate([v for _, v in self.per_block], self.r)

    def to_dict(self) -> dict:
        out = {"value": self.value, "blocks": [[j, v] for j, v in self.per_block],
               "residue": self.truncation_residue}
        if self.low:
            out["low"] = self.low
        return out

    def to_json(self) -> str:
        return json.dumps(_json_safe(self.to_dict()))


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def truncation_residue(f, rng: BlockRange | None = None) -> float:
    """||P_{>j_max} f||_2 / ||f||_2, from the spectrum."""
    comps = _components(f)
    grid = comps[0].grid
    rng = _resolve(grid, rng)
    hi = (1.0 - low_symbol(grid, rng.j_max)) ** 2
    w = half_weights(grid)
    top = bottom = 0.0
    for c in comps:
        p = np.abs(c.spectrum) ** 2 * w
        top += float(np.sum(p * hi))
        bottom += float(np.sum(p))
    return math.sqrt(top / bottom) if bottom > 0 else 0.0


def block_pieces(f, j: int) -> list[np.ndarray]:
    """Samples of P_j applied to each component (no range check)."""
    m = block_symbol(_components(f)[0].grid, j)
    return [apply_multiplier(c, m).samples for c in _components(f)]


def block_norms(f, q: float, rng: BlockRange | None = None) -> list[tuple[int, float]]:
    """(j, ||P_j f||_q) over the block range."""
    comps = _components(f)
    rng = _resolve(comps[0].grid, rng)
    return [(j, _lq(_magnitude(block_pieces(f, j)), q)) for j in rng]


def besov_norm(f, spec: NormSpec) -> NormReport:
    """l^r over j of 2^{js} ||P_j f||_q; inhomogeneous adds ||P_{<=0} f||_q and keeps j >= 1."""
    if spec.family != "besov":
        raise ValueError("besov_norm needs a besov NormSpec")
    comps = _components(f)
    grid = comps[0].grid
    rng = _resolve(grid, spec.range)
    q = float(spec.q)
    low = 0.0
    js = list(rng)
    if not spec.homogeneous:
        m = low_symbol(grid, 0)
        low = _lq(_magnitude([apply_multiplier(c, m).samples for c in comps]), q)
        js = [j for j in js if j >= 1]
    blocks = [(j, 2.0 ** (j * spec.s) * _lq(_magnitude(block_pieces(f, j)), q)) for j in js]
    report = NormReport(0.0, blocks, truncation_residue(f, rng), low, float(spec.r))
    report.value = report.recompute()
    if report.flagged:
        warnings.warn(f"besov truncation residue {report.truncation_residue:.3e} exceeds "
                      f"{TRUNCATION_FLAG}", TruncationWarning, stacklevel=2)
    return report


def besov(f, s: float, q: float, r: float, homogeneous: bool = True, rng: BlockRange | None = None) -> float:
    return besov_norm(f, NormSpec.besov(s, q, r, homogeneous, rng)).value


def besov_family(f, s_values, q_values, r_values, homogeneous: bool = True,
                 rng: BlockRange | None = None) -> dict[tuple[float, float, float], NormReport]:
    """Besov reports for every (s, q, r) combination, sharing one set of block projections.

    Each report equals besov_norm with the matching NormSpec.
    """
    comps = _components(f)
    grid = comps[0].grid
    rng = _resolve(grid, rng)
    qs = sorted({float(q) for q in q_values})
    for q in qs:
        _check_exponent(q)
    js = [j for j in rng if homogeneous or j >= 1]
    block_q = {q: [] for q in qs}
    for j in js:
        mag = _magnitude(block_pieces(f, j))
        for q in qs:
            block_q[q].append(_lq(mag, q))
    low_q = {q: 0.0 for q in qs}
    if not homogeneous:
        m = low_symbol(grid, 0)
        mag = _magnitude([apply_multiplier(c, m).samples for c in comps])
        low_q = {q: _lq(mag, q) for q in qs}
    residue = truncation_residue(f, rng)
    if residue > TRUNCATION_FLAG:
        warnings.warn(f"besov truncation residue {residue:.3e} exceeds {TRUNCATION_FLAG}",
                      TruncationWarning, stacklevel=2)
    out = {}
    for s in s_values:
        for q in q_values:
            for r in r_values:
                _check_exponent(r, "r")
                blocks = [(j, 2.0 ** (j * float(s)) * v) for j, v in zip(js, block_q[float(q)])]
                rep = NormReport(0.0, blocks, residue, low_q[float(q)], float(r))
                rep.value = rep.recompute()
                out[(float(s), float(q), float(r))] = rep
    return out


# --------------------------------------------------------------------------
# finite-difference seminorms

def difference_directions(dim: int) -> list[tuple[int, ...]]:
    """Axis unit vectors and {-1,0,1} diagonals, one representative per +/- pair."""
    out = []
    for v in itertools.product((-1, 0, 1), repeat=dim):
        nz = [x for x in v if x]
        if not nz or nz[0] < 0:
            continue
        out.append(v)
    out.sort(key=lambda v: (sum(map(abs, v)), [-x for x in v]))
    return out


def difference_offsets(grid: Grid) -> list[tuple[tuple[int, ...], float]]:
    """(integer shift, physical length) pairs: 2^m grid steps, m = 0..log2(N/4)."""
    top = max(0, int(math.log2(grid.points // 4))) if grid.points >= 4 else 0
    out = []
    for d in difference_directions(grid.dim):
        norm = math.sqrt(sum(x * x for x in d))
        for m in range(top + 1):
            step = 2 ** m
            out.append((tuple(step * x for x in d), step * grid.spacing * norm))
    return out


def _shifted(a: np.ndarray, shift: tuple[int, ...]) -> np.ndarray:
    return np.roll(a, tuple(-s for s in shift), axis=tuple(range(a.ndim)))


def difference_maxima(f) -> list[tuple[float, float]]:
    """(|h|, max_x |f(x+h) - f(x)|) for every dyadic offset h."""
    comps = _components(f)
    out = []
    for shift, length in difference_offsets(comps[0].grid):
        diff = _magnitude([_shifted(c.samples, shift) - c.samples for c in comps])
        out.append((length, float(diff.max())))
    return out


def holder_from_maxima(maxima: Sequence[tuple[float, float]], alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    best = 0.0
    for length, m in maxima:
        best = max(best, m / length ** alpha)
    return best


def holder_seminorm(f, alpha: float) -> float:
    """sup |f(x+h) - f(x)| / |h|^alpha over grid points and dyadic axial/diagonal offsets."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return holder_from_maxima(difference_maxima(f), alpha)


def second_difference_seminorm(f) -> float:
    """sup |f(x+h) + f(x-h) - 2f(x)| / |h| over the same offsets."""
    comps = _components(f)
    best = 0.0
    for shift, length in difference_offsets(comps[0].grid):
        neg = tuple(-s for s in shift)
        diff = _magnitude([_shifted(c.samples, shift) + _shifted(c.samples, neg) - 2.0 * c.samples
                           for c in comps])
        best = max(best, float(diff.max()) / length)
    return best


# --------------------------------------------------------------------------
# Hardy space and maximal function

def square_function(f: RealField, rng: BlockRange | None = None) -> RealField:
    """(sum_j |P_j f|^2)^{1/2} over the block range, summed in increasing j."""
    rng = _resolve(f.grid, rng)
    acc = np.zeros(f.grid.shape)
    for j in rng:
        b = apply_multiplier(f, block_symbol(f.grid, j)).samples
        acc += b * b
    return RealField._wrap(f.grid, np.sqrt(acc, out=acc))


def hardy_norm(f: RealField, rng: BlockRange | None = None) -> float:
    """L^1 norm of the square function; a nonzero mean is removed with a warning."""
    scale = math.sqrt(f.mean_square())
    mean = f.mean()
    if abs(mean) > HARDY_MEAN_TOL * scale:
        warnings.warn(f"hardy_norm removed mean {mean:.3e}", MeanRemovedWarning, stacklevel=2)
        f = f - mean
    return lebesgue_norm(square_function(f, rng), 1.0)


def _ball_mask(grid: Grid, radius: float) -> np.ndarray:
    x = grid.coordinates(centered=True)
    r2 = sum(c * c for c in x)
    return (r2 <= radius * radius * (1 + 1e-12)).astype(np.float64)


def maximal_radii(grid: Grid) -> list[float]:
    """Dyadic radii L 2^-m down to the first radius containing only the center."""
    out = []
    m = 1
    while True:
        rad = grid.length * 2.0 ** -m
        out.append(rad)
        if rad < grid.spacing:
            return out
        m += 1


def maximal_function(f, r_power: float = 1.0, radii: Sequence[float] | None = None) -> RealField:
    """(M |f|^r)^{1/r}: sup over centered periodic balls of the average of |f|^r."""
    r_power = float(r_power)
    if not r_power > 0:
        raise ValueError(f"r_power must be positive, got {r_power}")
    comps = _components(f)
    grid = comps[0].grid
    base = _magnitude([c.samples for c in comps]) ** r_power
    spec = sfft.rfftn(base, axes=grid.axes, workers=fft_workers())
    best = np.zeros(grid.shape)
    for rad in (maximal_radii(grid) if radii is None else radii):
        mask = _ball_mask(grid, rad)
        count = mask.sum()
        kern = sfft.rfftn(mask, axes=grid.axes, workers=fft_workers())
        avg = sfft.irfftn(spec * np.conj(kern), s=grid.shape, axes=grid.axes, workers=fft_workers()) / count
        np.maximum(best, avg, out=best)
    np.maximum(best, 0.0, out=best)
    return RealField._wrap(grid, best ** (1.0 / r_power))


def evaluate(f, spec: NormSpec) -> float:
    """Dispatch a NormSpec to the matching norm."""
    if spec.family == "lebesgue":
        return lebesgue_norm(f, spec.q)
    if spec.family == "sobolev":
        return sobolev_norm(f, spec.s, spec.q, spec.homogeneous)
    if spec.family == "besov":
        return besov_norm(f, spec).value
    if spec.family == "holder":
        return holder_seminorm(f, spec.s)
    return hardy_norm(f, spec.range)
