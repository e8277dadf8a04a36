"""Norm-inflation constructions and their diagnostics.

Each construction sums rescaled copies of one profile across well separated
frequency scales and tracks the quantity that grows with the number of
scales J while the input norm stays bounded.  Lattice-supported profiles are
kept as sparse coefficient lists so that dilation by an integer factor and
translation are exact.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, RelaxedSeparationWarning, ResolutionError, SupportError
from .fields import (
    Grid,
    RealField,
    VectorField,
    _derivative_symbol,
    fft_workers,
    perp_gradient,
    radius_symbol,
    scatter_spectrum,
)
from .lp import CUTOFF, BlockRange, block_symbol, low_symbol
from .norms import NormSpec, besov_norm, lebesgue_norm
from .pressure import pressure, riesz_double_symbol

DEFAULT_ANNULUS = (2.0 / 3.0, 5.0 / 6.0)
DEFAULT_RATIO = 4.0


# --------------------------------------------------------------------------
# configuration and reports

@dataclass(frozen=True)
class InflationConfig:
    """Scale sequence and grid for one construction.

    `scales` are the frequency scales (or physical dilations for the
    compactly supported construction); the first J are used.  `min_ratio`
    is the required consecutive-scale ratio and `sqrt_exponent` the exponent e
    in the separation condition N_{j-1} <= N_j^e used by the half-Hoelder
    construction (1/2 is the exact condition).
    """

    grid: Grid
    scales: tuple[float, ...]
    J: int | None = None
    J_values: tuple[int, ...] | None = None
    annulus: tuple[float, float] = DEFAULT_ANNULUS
    min_ratio: float = DEFAULT_RATIO
    sqrt_exponent: float = 0.5
    base_scale: float | None = None

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        object.__setattr__(self, "scales", scales)
        J = len(scales) if self.J is None else int(self.J)
        object.__setattr__(self, "J", J)
        if J < 0 or J > len(scales):
            raise ConfigurationError(f"J={J} needs at least J scales, got {len(scales)}")
        if any(s <= 0 for s in scales):
            raise ConfigurationError("scales must be positive")
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ConfigurationError("scales must be strictly increasing")
        lo, hi = self.annulus
        if not 0 < lo < hi:
            raise ConfigurationError(f"bad annulus {self.annulus}")
        values = tuple(range(1, J + 1)) if self.J_values is None else tuple(int(v) for v in self.J_values)
        if any(v < 0 or v > J for v in values) or list(values) != sorted(set(values)):
            raise ConfigurationError(f"J_values {values} must be increasing and within 0..{J}")
        object.__setattr__(self, "J_values", values)

    @property
    def used(self) -> tuple[float, ...]:
        return self.scales[: self.J]

    @property
    def reference_scale(self) -> float:
        return self.scales[0] if self.base_scale is None else float(self.base_scale)

    def check_ratio(self) -> bool:
        """True when the ratio condition holds; relaxed ratios warn and return False."""
        used = self.used
        ratios = [b / a for a, b in zip(used, used[1:])]
        if self.min_ratio < DEFAULT_RATIO:
            warnings.warn(f"scale separation relaxed to ratio {self.min_ratio}", RelaxedSeparationWarning,
                          stacklevel=3)
        for r in ratios:
            if r < self.min_ratio * (1 - 1e-12):
                raise ConfigurationError(f"consecutive scale ratio {r:.3g} below {self.min_ratio}")
        return self.min_ratio >= DEFAULT_RATIO

    def check_nyquist(self, top_frequency: float) -> None:
        if top_frequency * CUTOFF > self.grid.nyquist:
            raise ConfigurationError(f"top frequency {top_frequency:.4g} x 7/6 exceeds Nyquist "
                                     f"{self.grid.nyquist:.4g} of N={self.grid.points}")


@dataclass
class JRow:
    J: int
    input_norm: float
    output_norm: float
    ratio: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class InflationReport:
    construction: str
    per_J: list[JRow]
    diagonal_norm: float = 0.0
    offdiag_point_value: float = 0.0
    fitted_slope: float = 0.0
    fit_residual: float = 0.0
    output_slope: float = 0.0
    relaxed: bool = False
    extra: dict = field(default_factory=dict)

    def fit_rows(self) -> list[JRow]:
        return [r for r in self.per_J if r.J >= 2]

    def finalize(self) -> "InflationReport":
        rows = self.fit_rows()
        if len(rows) >= 2:
            J = np.array([r.J for r in rows], dtype=float)
            for attr, ys in (("fitted_slope", [r.ratio for r in rows]), ("output_slope", [r.output_norm for r in rows])):
                y = np.array(ys)
                coef = np.polyfit(J, y, 1)
                setattr(self, attr, float(coef[0]))
                if attr == "fitted_slope":
                    self.fit_residual = float(np.sqrt(np.mean((np.polyval(coef, J) - y) ** 2)))
        if self.per_J:
            self.offdiag_point_value = self.per_J[-1].output_norm
        return self

    def plot_rows(self) -> list[tuple[int, float]]:
        return [(r.J, r.ratio) for r in self.fit_rows()]

    def to_dict(self) -> dict:
        return {
            "construction": self.construction,
            "per_J": [{"J": r.J, "input_norm": r.input_norm, "output_norm": r.output_norm,
                       "ratio": r.ratio, "diagnostics": r.diagnostics} for r in self.per_J],
            "diagonal_norm": self.diagonal_norm,
            "offdiag_point_value": self.offdiag_point_value,
            "fitted_slope": self.fitted_slope,
            "fit_residual": self.fit_residual,
            "output_slope": self.output_slope,
            "relaxed": self.relaxed,
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def plot_text(self) -> str:
        return "".join(f"{j} {format(r, '.17g')}\n" for j, r in self.plot_rows())


def _ratio(out: float, inp: float) -> float:
    return out / inp if inp > 0 else 0.0


# --------------------------------------------------------------------------
# sparse lattice profiles

@dataclass(frozen=True)
class LatticePattern:
    """Trigonometric polynomial sum_k c_k exp(i k.x) with integer k, closed under k -> -k."""

    ks: np.ndarray
    coeffs: np.ndarray

    def dilate(self, factor: int) -> "LatticePattern":
        """x -> factor * x."""
        if int(factor) != factor or factor < 1:
            raise ConfigurationError(f"lattice dilation needs a positive integer factor, got {factor}")
        return LatticePattern(self.ks * int(factor), self.coeffs)

    def translate(self, shift, fundamental: float = 1.0) -> "LatticePattern":
        """x -> x + shift."""
        phase = np.exp(1j * fundamental * (self.ks @ np.asarray(shift, dtype=float)))
        return LatticePattern(self.ks, self.coeffs * phase)

    def scale(self, a: float) -> "LatticePattern":
        return LatticePattern(self.ks, self.coeffs * a)

    def shift_frequency(self, k: np.ndarray) -> "LatticePattern":
        """Multiply by cos(k.x)."""
        k = np.asarray(k, dtype=np.int64)
        return LatticePattern(np.concatenate([self.ks + k, self.ks - k]),
                              np.concatenate([self.coeffs, self.coeffs]) * 0.5)

    def __add__(self, other: "LatticePattern") -> "LatticePattern":
        return LatticePattern(np.concatenate([self.ks, other.ks]), np.concatenate([self.coeffs, other.coeffs]))

    def max_index(self) -> float:
        return float(np.sqrt((self.ks.astype(float) ** 2).sum(axis=1)).max()) if len(self.ks) else 0.0

    def spectrum(self, grid: Grid, orders=None) -> np.ndarray:
        c = self.coeffs
        if orders is not None:
            xi = self.ks.astype(float) * grid.fundamental
            for a, o in enumerate(orders):
                if o:
                    c = c * (1j * xi[:, a]) ** o
        return scatter_spectrum(grid, self.ks, c)

    def samples(self, grid: Grid, orders=None) -> np.ndarray:
        return sfft.irfftn(self.spectrum(grid, orders), s=grid.shape, axes=grid.axes, workers=fft_workers())

    def field(self, grid: Grid, orders=None) -> RealField:
        return RealField.from_spectrum(grid, self.spectrum(grid, orders))


def _bump(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        inside = np.abs(t) < 1
        return np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - t * t, 1.0)), 0.0)


def radial_pattern(dim: int, band: tuple[float, float], fundamental: float = 1.0) -> LatticePattern:
    """Nonnegative radial bump on the lattice frequencies inside the band, normalized to value 1 at 0."""
    lo, hi = float(band[0]), float(band[1])
    kmax = int(math.floor(hi / fundamental)) + 1
    r = np.arange(-kmax, kmax + 1)
    ks = np.stack(np.meshgrid(*([r] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    rad = np.sqrt((ks.astype(float) ** 2).sum(axis=1)) * fundamental
    t = (2.0 * rad - lo - hi) / (hi - lo)
    c = _bump(t)
    keep = c > 0
    if not keep.any():
        raise ResolutionError(f"band {band} holds no lattice frequency")
    ks, c = ks[keep], c[keep]
    return LatticePattern(ks.astype(np.int64), (c / c.sum()).astype(np.complex128))


@dataclass(frozen=True)
class ProfileMoments:
    m11: float
    m22: float
    m12: float


def pattern_moments(pattern: LatticePattern, fundamental: float = 1.0) -> ProfileMoments:
    xi = pattern.ks.astype(float) * fundamental
    c = pattern.coeffs.real
    return ProfileMoments(float(np.sum(xi[:, 0] ** 2 * c)), float(np.sum(xi[:, 1] ** 2 * c)),
                          float(np.sum(xi[:, 0] * xi[:, 1] * c)))


def build_phi0(grid: Grid, band=DEFAULT_ANNULUS) -> tuple[RealField, ProfileMoments]:
    """Radial profile with nonnegative spectrum on the lattice band, plus its second moments.

    Checks pointwise that d12 phi0(0) = 0 and d11 phi0(0) d22 phi0(0) != 0.
    """
    if grid.dim < 2:
        raise ConfigurationError("the profile needs dimension >= 2")
    if not 0 < band[0] < band[1] < grid.nyquist:
        raise ConfigurationError(f"band {band} must lie in (0, Nyquist={grid.nyquist})")
    pattern = radial_pattern(grid.dim, band, grid.fundamental)
    phi = pattern.field(grid)
    mom = pattern_moments(pattern, grid.fundamental)
    orders = lambda a, b: tuple(int(i == a) + int(i == b) for i in range(grid.dim))  # noqa: E731
    d12 = pattern.field(grid, orders(0, 1)).at_origin()
    d11 = pattern.field(grid, orders(0, 0)).at_origin()
    d22 = pattern.field(grid, orders(1, 1)).at_origin()
    scale = abs(d11) + abs(d22)
    if abs(d12) > 1e-12 * max(scale, 1.0) or d11 * d22 == 0:
        raise ConfigurationError("profile fails the moment conditions")
    return phi, mom


def _power_of_two(x: float) -> int:
    j = round(math.log2(x))
    if not math.isclose(2.0 ** j, x, rel_tol=1e-12):
        raise ConfigurationError(f"scale {x} is not a power of two")
    return j


def _block_value_at_origin(grid: Grid, spectrum: np.ndarray, j: int) -> float:
    """(P_j f)(0) from a half spectrum, as a weighted lattice sum."""
    from .fields import half_weights

    return float(np.sum((spectrum * block_symbol(grid, j)).real * half_weights(grid))) / grid.size


def _wrap(grid: Grid, a: np.ndarray) -> RealField:
    return RealField._wrap(grid, a)


def _sup_blocks(grid: Grid, samples: np.ndarray, rng: BlockRange) -> tuple[float, float]:
    """(||P_{<=1} f||_inf, sup_l ||P_l f||_inf) with l over the range."""
    spec = sfft.rfftn(samples, axes=grid.axes, workers=fft_workers())
    low = float(np.abs(sfft.irfftn(spec * low_symbol(grid, 1), s=grid.shape, axes=grid.axes,
                                   workers=fft_workers())).max())
    top = 0.0
    for j in rng:
        b = sfft.irfftn(spec * block_symbol(grid, j), s=grid.shape, axes=grid.axes, workers=fft_workers())
        top = max(top, float(np.abs(b).max()))
    return low, top


def _velocity_input_norm(grid: Grid, stream: LatticePattern, s: float) -> float:
    """||grad^perp phi||_{B^s_{inf,inf}} + ||grad^perp phi||_2 for a stream-function pattern."""
    u1 = RealField.from_spectrum(grid, -stream.spectrum(grid, (0, 1)))
    u2 = RealField.from_spectrum(grid, stream.spectrum(grid, (1, 0)))
    u = VectorField(grid, (u1, u2))
    return besov_norm(u, NormSpec.besov(s, math.inf, math.inf)).value + lebesgue_norm(u, 2.0)


# --------------------------------------------------------------------------
# s = 1: diagonal / off-diagonal split of the pressure source

def inflate_s1(config: InflationConfig) -> InflationReport:
    """Sum of lambda^-2 phi0(lambda x) over geometric scales.

    -Lap p / 2 = (d12 phi)^2 - d11 phi d22 phi splits into the same-scale
    part H1 and the cross-scale part H2.  Reports the input norm
    ||u||_{B^1_{inf,inf}} + ||u||_2, the bounds ||P_{<=1} H1||, sup_l ||P_l H1||
    and the point value |(P_j1 H2)(0)| at the block j1 of the top scale.
    """
    grid = config.grid
    if grid.dim != 2:
        raise ConfigurationError("inflate_s1 runs in dimension 2")
    relaxed = not config.check_ratio()
    scales = config.used
    base = config.reference_scale
    lo, hi = config.annulus
    if scales:
        config.check_nyquist(hi * scales[-1])
        if 2 * hi * scales[-1] >= grid.nyquist:
            raise ConfigurationError("products of the top scale alias on this grid")
    pattern = radial_pattern(2, (lo * base, hi * base), grid.fundamental)
    rng = BlockRange.for_grid(grid)
    blocks = [_power_of_two(s) for s in scales]
    if any(j not in rng for j in blocks):
        raise ConfigurationError(f"scale blocks {blocks} fall outside the range {rng.j_min}..{rng.j_max}")

    shape = grid.shape
    S = {k: np.zeros(shape) for k in ("11", "22", "12")}
    H1 = np.zeros(shape)
    H2 = np.zeros(shape)
    stream = None
    rows = []
    diag_max = 0.0
    for i, mu in enumerate(scales, start=1):
        piece = pattern.dilate(round(mu / base)).scale((mu / base) ** -2)
        stream = piece if stream is None else stream + piece
        D = {"11": piece.samples(grid, (2, 0)), "22": piece.samples(grid, (0, 2)),
             "12": piece.samples(grid, (1, 1))}
        H2_prev = H2
        H1 = H1 + (D["12"] * D["12"] - D["11"] * D["22"])
        X = 2.0 * D["12"] * S["12"] - D["11"] * S["22"] - D["22"] * S["11"]
        H2 = H2 + X
        for k in S:
            S[k] = S[k] + D[k]
        del D, X
        if i not in config.J_values:
            continue
        j1 = blocks[i - 1]
        spec2 = sfft.rfftn(H2, axes=grid.axes, workers=fft_workers())
        point = abs(_block_value_at_origin(grid, spec2, j1))
        top_energy = float(np.sum(np.abs(spec2 * block_symbol(grid, j1)) ** 2))
        prev_spec = sfft.rfftn(H2_prev, axes=grid.axes, workers=fft_workers())
        leak = float(np.sum(np.abs(prev_spec * block_symbol(grid, j1)) ** 2))
        del spec2, prev_spec
        low, sup_l = _sup_blocks(grid, H1, rng)
        diag_max = max(diag_max, sup_l)
        inp = _velocity_input_norm(grid, stream, 1.0)
        rows.append(JRow(i, inp, point, _ratio(point, inp), {
            "block": j1, "low_H1": low, "sup_block_H1": sup_l,
            "lower_pair_leak": leak / top_energy if top_energy > 0 else 0.0,
            "H2_sup": float(np.abs(H2).max()),
        }))
    report = InflationReport("inflate_s1", rows, diagonal_norm=diag_max, relaxed=relaxed)
    report.extra = {"scales": list(scales), "pattern_points": int(len(pattern.ks))}
    return report.finalize()


def s1_source_split(config: InflationConfig) -> tuple[RealField, RealField, RealField]:
    """(H1, H2, (d12 phi)^2 - d11 phi d22 phi) for the full scale sequence, for reassembly checks."""
    grid = config.grid
    scales = config.used
    base = config.reference_scale
    lo, hi = config.annulus
    pattern = radial_pattern(2, (lo * base, hi * base), grid.fundamental)
    pieces = [pattern.dilate(round(mu / base)).scale((mu / base) ** -2) for mu in scales]
    H1 = np.zeros(grid.shape)
    for p in pieces:
        d11, d22, d12 = (p.samples(grid, o) for o in ((2, 0), (0, 2), (1, 1)))
        H1 += d12 * d12 - d11 * d22
    total = pieces[0]
    for p in pieces[1:]:
        total = total + p
    d11, d22, d12 = (total.samples(grid, o) for o in ((2, 0), (0, 2), (1, 1)))
    full = d12 * d12 - d11 * d22
    return _wrap(grid, H1), _wrap(grid, full - H1), _wrap(grid, full)


# --------------------------------------------------------------------------
# s = 0: modulated carrier

def s0_reference(grid: Grid, carrier_band=(0.5, 1.5), j0: int = 1) -> float:
    """(P_j0 R_11 (g^2))(0) for the carrier g; R_11 has symbol xi_1^2/|xi|^2."""
    g = radial_pattern(2, carrier_band, grid.fundamental).field(grid)
    gg = g * g
    return _block_value_at_origin(grid, gg.spectrum * riesz_double_symbol(grid, 0, 0), j0)


def inflate_s0(config: InflationConfig, carrier_band=(0.5, 1.5), j0: int = 1) -> InflationReport:
    """phi = sum_j k_j^-1 cos(k_j x2) g(x) with nonnegative carrier spectrum.

    Reports |(P_j0 p)(0)|, the input norm ||phi||_{B^1_{inf,inf}} + ||phi||_2 and
    the B^0_{inf,inf} size of -p - (J/2) R_11(g^2).
    """
    grid = config.grid
    if grid.dim != 2:
        raise ConfigurationError("inflate_s0 runs in dimension 2")
    relaxed = not config.check_ratio()
    ks = [int(round(k)) for k in config.used]
    if any(not math.isclose(k, s) for k, s in zip(ks, config.used)):
        raise ConfigurationError("carrier frequencies must be lattice integers")
    carrier = radial_pattern(2, carrier_band, grid.fundamental)
    gb = carrier.max_index() * grid.fundamental
    block_top = CUTOFF * 2.0 ** j0
    if ks:
        config.check_nyquist(ks[-1] + gb)
        if 2 * (ks[-1] + gb) >= grid.nyquist:
            raise ConfigurationError("products of the top carrier frequency alias on this grid")
        gaps = [b - a for a, b in zip(ks, ks[1:])] + [2 * ks[0]]
        if min(gaps) * grid.fundamental - 2 * gb <= block_top:
            raise ConfigurationError("carrier frequencies too close: cross terms reach block j0")
    g = carrier.field(grid)
    ref_spec = (g * g).spectrum * riesz_double_symbol(grid, 0, 0)
    reference = _block_value_at_origin(grid, ref_spec, j0)
    ref_field = RealField.from_spectrum(grid, ref_spec)
    rows = []
    phi = None
    for i in range(0, len(ks) + 1):
        if i > 0:
            term = carrier.shift_frequency(np.array([0, ks[i - 1]])).scale(1.0 / ks[i - 1])
            phi = term if phi is None else phi + term
        if i not in config.J_values:
            continue
        if phi is None:
            rows.append(JRow(0, 0.0, 0.0, 0.0, {"remainder_b0": 0.0}))
            continue
        phif = phi.field(grid)
        u = perp_gradient(phif)
        p = pressure(u, dealias=False)
        point = abs(_block_value_at_origin(grid, p.spectrum, j0))
        rem = RealField._wrap(grid, -p.samples - 0.5 * i * ref_field.samples)
        rem_b0 = besov_norm(rem, NormSpec.besov(0.0, math.inf, math.inf)).value
        inp = besov_norm(phif, NormSpec.besov(1.0, math.inf, math.inf)).value + lebesgue_norm(phif, 2.0)
        rows.append(JRow(i, inp, point, _ratio(point, inp), {"remainder_b0": rem_b0,
                                                            "p_block_value": _block_value_at_origin(grid, p.spectrum, j0)}))
        del phif, u, p, rem
    report = InflationReport("inflate_s0", rows, relaxed=relaxed)
    report.extra = {"reference": reference, "predicted_slope": 0.5 * abs(reference), "j0": j0,
                    "frequencies": ks}
    report.diagonal_norm = max((r.diagnostics.get("remainder_b0", 0.0) for r in rows), default=0.0)
    return report.finalize()


# --------------------------------------------------------------------------
# half-Hoelder: self-interaction at a searched point

def _transport_gradient(grid: Grid, a: list[np.ndarray], b: list[np.ndarray]) -> list[np.ndarray]:
    """grad (-Lap)^{-1} div ((a.grad) b), componentwise samples; sample products."""
    n = grid.dim
    r = radius_symbol(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(r > 0, 1.0 / np.where(r > 0, r * r, 1.0), 0.0)
    bspec = [sfft.rfftn(c, axes=grid.axes, workers=fft_workers()) for c in b]
    d = [_derivative_symbol(grid, tuple(int(i == k) for i in range(n))) for k in range(n)]
    q = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for i in range(n):
        wi = np.zeros(grid.shape)
        for k in range(n):
            dk_bi = sfft.irfftn(d[k] * bspec[i], s=grid.shape, axes=grid.axes, workers=fft_workers())
            wi += a[k] * dk_bi
        q += d[i] * sfft.rfftn(wi, axes=grid.axes, workers=fft_workers())
    q *= inv
    return [sfft.irfftn(d[j] * q, s=grid.shape, axes=grid.axes, workers=fft_workers()) for j in range(n)]


def _perp_samples(grid: Grid, pattern: LatticePattern) -> list[np.ndarray]:
    return [-pattern.samples(grid, (0, 1)), pattern.samples(grid, (1, 0))]


def find_peak_shift(grid: Grid, pattern: LatticePattern) -> np.ndarray:
    """Grid point x* maximizing |grad(-Lap)^{-1} div((v.grad)v)| for v = grad^perp of the pattern."""
    v = _perp_samples(grid, pattern)
    h = _transport_gradient(grid, v, v)
    mag = np.sqrt(sum(c * c for c in h))
    idx = np.unravel_index(int(np.argmax(mag)), grid.shape)
    x = grid.coordinates(centered=True)
    return np.array([float(x[a].ravel()[idx[a]]) for a in range(grid.dim)])


def inflate_half_holder(config: InflationConfig, shift=None) -> InflationReport:
    """u = sum_j N_j^{-1/2} (grad^perp phi0)(N_j x + x*) with N_{j-1} <= N_j^e.

    The diagonal H = sum_j T(v_j, v_j) with T(a, b) = grad(-Lap)^{-1}div((a.grad)b)
    is evaluated at 0; the cross pieces sum_j T(v_j, v_{<j}) and
    sum_j T(v_{<j}, v_j) are reported in sup norm against the envelope
    sum_j (N_{j-1}/N_j)^{1/2}.
    """
    grid = config.grid
    if grid.dim != 2:
        raise ConfigurationError("inflate_half_holder runs in dimension 2")
    scales = config.used
    e = float(config.sqrt_exponent)
    if e < 0.5:
        raise ConfigurationError("separation exponent must be >= 1/2")
    relaxed = e > 0.5
    if relaxed:
        warnings.warn(f"separation relaxed to N_(j-1) <= N_j^{e}", RelaxedSeparationWarning, stacklevel=2)
    for a, b in zip(scales, scales[1:]):
        if a > b ** e * (1 + 1e-12):
            raise ConfigurationError(f"separation violated: {a} > {b}^{e}")
    base = config.reference_scale
    lo, hi = config.annulus
    if scales:
        config.check_nyquist(hi * scales[-1])
        if 2 * hi * scales[-1] >= grid.nyquist:
            raise ConfigurationError("products of the top scale alias on this grid")
    pattern = radial_pattern(2, (lo * base, hi * base), grid.fundamental)
    if shift is None:
        shift = find_peak_shift(grid, pattern.scale(base ** -1.5))
    pattern = pattern.translate(shift, grid.fundamental)

    rows = []
    H = [np.zeros(grid.shape) for _ in range(2)]
    E5b = [np.zeros(grid.shape) for _ in range(2)]
    E5c = [np.zeros(grid.shape) for _ in range(2)]
    lower = [np.zeros(grid.shape) for _ in range(2)]
    stream = None
    envelope = 0.0
    single = None
    for i, n_j in enumerate(scales, start=1):
        piece = pattern.dilate(round(n_j / base)).scale(n_j ** -1.5)
        stream = piece if stream is None else stream + piece
        v = _perp_samples(grid, piece)
        for acc, t in zip(H, _transport_gradient(grid, v, v)):
            acc += t
        if i > 1:
            envelope += math.sqrt(scales[i - 2] / n_j)
            for acc, t in zip(E5b, _transport_gradient(grid, v, lower)):
                acc += t
            for acc, t in zip(E5c, _transport_gradient(grid, lower, v)):
                acc += t
        for acc, c in zip(lower, v):
            acc += c
        del v
        if i not in config.J_values:
            continue
        h0 = math.sqrt(sum(float(c[(0, 0)]) ** 2 for c in H))
        if single is None and i == 1:
            single = h0
        sup_b = float(np.sqrt(sum(c * c for c in E5b)).max())
        sup_c = float(np.sqrt(sum(c * c for c in E5c)).max())
        inp = _velocity_input_norm(grid, stream, 0.5)
        rows.append(JRow(i, inp, h0, _ratio(h0, inp), {
            "offdiag_b_sup": sup_b, "offdiag_c_sup": sup_c,
            "offdiag_sup": float(np.sqrt(sum((b + c) ** 2 for b, c in zip(E5b, E5c))).max()),
            "envelope": envelope,
        }))
    report = InflationReport("inflate_half_holder", rows, relaxed=relaxed)
    report.extra = {"shift": [float(x) for x in shift], "scales": list(scales),
                    "single_scale_value": single}
    report.diagonal_norm = max((r.output_norm for r in rows), default=0.0)
    return report.finalize()


# --------------------------------------------------------------------------
# C^1: compactly supported, disjoint physical supports

ENVELOPE_POWER = 12


def polynomial_bump(t, power: int = ENVELOPE_POWER):
    """(1 - t^2)^power on |t| < 1, else 0: C^(power-1) with compact support.

    Its spectrum falls off far faster over grid-resolvable frequencies than
    exp(-1/(1 - t^2)), so point values of high derivatives converge at desk resolution.
    """
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) < 1, (1.0 - np.minimum(t * t, 1.0)) ** power, 0.0)


def modulated_bump(grid: Grid, carrier: float = 8.0, eta: float = 0.3, center=None, k: float = 1.0):
    """Samples of k^-2 phi0(k x), phi0(x) = cos(carrier x2) c((x - x*)/eta), in centered coordinates."""
    if center is None:
        center = (1.0,) + (0.0,) * (grid.dim - 1)
    x = grid.coordinates(centered=True)
    r2 = sum((k * xa - ca) ** 2 for xa, ca in zip(x, center)) / eta ** 2
    env = polynomial_bump(np.sqrt(r2))
    return k ** -2 * np.cos(carrier * k * x[1]) * env


def c1_point_value(grid: Grid, scales, carrier: float = 8.0, eta: float = 0.3, center=None,
                   check_support: bool = True) -> tuple[float, dict]:
    """(d11 p)(0) for phi = sum_j k_j^-2 phi0(k_j x), plus input-norm pieces."""
    terms = [modulated_bump(grid, carrier, eta, center, k) for k in scales]
    if check_support:
        masks = [t != 0 for t in terms]
        for a in range(len(masks)):
            edge = np.zeros(grid.shape, dtype=bool)
            sl = [slice(None)] * grid.dim
            for ax in range(grid.dim):
                idx = list(sl)
                idx[ax] = [grid.points // 2 - 1, grid.points // 2]
                edge[tuple(idx)] = True
            if np.any(masks[a] & edge):
                raise SupportError("profile support reaches the box boundary")
            if not masks[a].any():
                raise ResolutionError(f"scale {scales[a]} leaves no sample inside the support")
            for b in range(a + 1, len(masks)):
                if np.any(masks[a] & masks[b]):
                    raise ConfigurationError(f"supports of scales {scales[a]} and {scales[b]} overlap")
    phi = RealField(grid, sum(terms))
    del terms
    u = perp_gradient(phi)
    p = pressure(u, dealias=False)
    orders = (2,) + (0,) * (grid.dim - 1)
    from .fields import derivative

    value = derivative(p, orders).at_origin()
    grads = [derivative(c, tuple(int(i == a) for i in range(grid.dim))) for c in u for a in range(grid.dim)]
    grad_sup = float(np.sqrt(sum(g.samples ** 2 for g in grads)).max())
    pieces = {"u_sup": lebesgue_norm(u, math.inf), "grad_u_sup": grad_sup, "u_l2": lebesgue_norm(u, 2.0)}
    return value, pieces


def inflate_c1(config: InflationConfig, carrier: float = 8.0, eta: float = 0.3, center=None) -> InflationReport:
    """phi = sum_j k_j^-2 phi0(k_j x) with disjoint annular supports; reports |(d11 p)(0)|."""
    grid = config.grid
    scales = config.used
    # separation here means disjoint physical supports, not the ratio-4 frequency rule
    c2, c1 = 1.0 + eta, 1.0 - eta
    for a, b in zip(scales, scales[1:]):
        if b / a <= c2 / c1:
            raise ConfigurationError(f"scale ratio {b / a:.3g} must exceed {c2 / c1:.3g} for disjoint supports")
    rows = []
    for J in config.J_values:
        if J == 0:
            rows.append(JRow(0, 0.0, 0.0, 0.0))
            continue
        value, pieces = c1_point_value(grid, scales[:J], carrier, eta, center)
        inp = pieces["u_sup"] + pieces["grad_u_sup"] + pieces["u_l2"]
        rows.append(JRow(J, inp, abs(value), _ratio(abs(value), inp), dict(pieces, signed_value=value)))
    report = InflationReport("inflate_c1", rows)
    report.extra = {"scales": list(scales), "carrier": carrier, "eta": eta}
    report.diagonal_norm = max((r.output_norm for r in rows), default=0.0)
    return report.finalize()


# --------------------------------------------------------------------------
# L^1 failure: second moments of the pressure source

def modulated_radial_profile(grid: Grid, k: float = 8.0, width: float = 0.5) -> RealField:
    """phi = b(x) cos(k x1) with radial Gaussian b, centered at the origin of the centered box."""
    x = grid.coordinates(centered=True)
    r2 = sum(c * c for c in x)
    return RealField(grid, np.exp(-r2 / width ** 2) * np.cos(k * x[0]))


def _check_leakage(phi: RealField, fraction: float = 0.05, tol: float = 1e-8) -> float:
    grid = phi.grid
    x = grid.coordinates(centered=True)
    edge = np.zeros(grid.shape, dtype=bool)
    cut = grid.length * (0.5 - fraction)
    for c in x:
        edge |= np.broadcast_to(np.abs(c) >= cut, grid.shape)
    mass = np.abs(phi.samples)
    total = float(mass.sum())
    leak = float(mass[edge].sum()) / total if total > 0 else 0.0
    if leak > tol:
        raise SupportError(f"boundary leakage {leak:.3e} exceeds {tol}")
    return leak


def l1_failure_moments(phi: RealField) -> tuple[float, float, float]:
    """(c1, c2, c12) = (int (d2 phi)^2, int (d1 phi)^2, -int d1 phi d2 phi) over the box."""
    if phi.grid.dim < 2:
        raise ConfigurationError("needs dimension >= 2")
    _check_leakage(phi)
    from .fields import partial_derivative

    d1 = partial_derivative(phi, 0).samples
    d2 = partial_derivative(phi, 1).samples
    vol = phi.grid.cell_volume
    return (float(np.sum(d2 * d2)) * vol, float(np.sum(d1 * d1)) * vol, -float(np.sum(d1 * d2)) * vol)


def source_moments(phi: RealField) -> tuple[float, float, float]:
    """Second moments (int g x1^2, int g x2^2, int g x1 x2) of g = (d12 phi)^2 - d11 phi d22 phi."""
    _check_leakage(phi)
    from .fields import derivative

    n = phi.grid.dim
    o = lambda a, b: tuple(int(i == a) + int(i == b) for i in range(n))  # noqa: E731
    d11 = derivative(phi, o(0, 0)).samples
    d22 = derivative(phi, o(1, 1)).samples
    d12 = derivative(phi, o(0, 1)).samples
    g = d12 * d12 - d11 * d22
    x = phi.grid.coordinates(centered=True)
    vol = phi.grid.cell_volume
    return (float(np.sum(g * x[0] ** 2)) * vol, float(np.sum(g * x[1] ** 2)) * vol,
            float(np.sum(g * x[0] * x[1])) * vol)
