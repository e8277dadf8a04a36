"""Periodic grids, real fields and their exact spectral calculus.

Spectra are kept in scipy's unnormalized real-to-complex layout internally
(last axis truncated to N/2 + 1 entries).  The public SpectralField uses the
full lattice and is normalized so that the constant field 1 has coefficient 1.
"""
from __future__ import annotations

import itertools
import math
import os
import struct
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, SolenoidalityError, SymmetryError

TWO_PI = 2.0 * math.pi
MAX_DIM = 4
HERMITIAN_TOL = 1e-10
SOLENOIDAL_FLAG_TOL = 1e-10


def fft_workers() -> int | None:
    """Worker count for scipy.fft, capped by PCAL_THREADS when set."""
    raw = os.environ.get("PCAL_THREADS", "").strip()
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box [0, L)^n with N points per axis."""

    dim: int
    points: int
    length: float = TWO_PI

    def __post_init__(self):
        if int(self.dim) != self.dim or not 1 <= self.dim <= MAX_DIM:
            raise ConfigurationError(f"grid dimension must be an integer in 1..{MAX_DIM}, got {self.dim}")
        n = int(self.points)
        if n != self.points or n < 2 or n & (n - 1):
            raise ConfigurationError(f"points per axis must be a power of two >= 2, got {self.points}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ConfigurationError(f"box length must be positive and finite, got {self.length}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "points", n)
        object.__setattr__(self, "length", float(self.length))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points ** self.dim

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.points,) * (self.dim - 1) + (self.points // 2 + 1,)

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(self.dim))

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def volume(self) -> float:
        return self.length ** self.dim

    @property
    def fundamental(self) -> float:
        """Smallest positive lattice frequency 2*pi/L."""
        return TWO_PI / self.length

    @property
    def nyquist(self) -> float:
        return math.pi * self.points / self.length

    def _axis_index(self, axis: int, half: bool) -> np.ndarray:
        n = self.points
        if half:
            k = np.arange(n // 2 + 1, dtype=np.float64)
            k[-1] = -(n // 2)
        else:
            k = np.fft.fftfreq(n, 1.0 / n)
        shape = [1] * self.dim
        shape[axis] = k.size
        return k.reshape(shape)

    def frequencies(self) -> tuple[np.ndarray, ...]:
        """Broadcastable physical frequencies on the half lattice."""
        last = self.dim - 1
        return tuple(self.fundamental * self._axis_index(a, a == last) for a in range(self.dim))

    def reflected_frequencies(self) -> tuple[np.ndarray, ...]:
        """The partner frequency -xi, except that Nyquist components stay at -N/2."""
        out = []
        nyq = -(self.points // 2)
        for k in self.frequencies():
            idx = k / self.fundamental
            out.append(np.where(idx == nyq, k, -k))
        return tuple(out)

    def coordinates(self, centered: bool = False) -> tuple[np.ndarray, ...]:
        """Broadcastable sample coordinates, in [0, L) or [-L/2, L/2) when centered.

        Centered coordinates are a relabeling of the same samples: index i maps
        to x = i*dx when i < N/2 and to (i - N)*dx otherwise, so the origin
        stays at index 0.
        """
        i = np.arange(self.points, dtype=np.float64)
        if centered:
            i = np.where(i < self.points // 2, i, i - self.points)
        x = i * self.spacing
        out = []
        for a in range(self.dim):
            shape = [1] * self.dim
            shape[a] = self.points
            out.append(x.reshape(shape))
        return tuple(out)


# --------------------------------------------------------------------------
# multiplier cache

class _MultiplierCache:
    """Byte-budgeted LRU cache for lattice multipliers keyed by (grid, key)."""

    def __init__(self, budget: int = 384 * 2 ** 20):
        self.budget = budget
        self._store: OrderedDict = OrderedDict()
        self._bytes = 0

    def get(self, grid: Grid, key, build: Callable[[Grid], np.ndarray]) -> np.ndarray:
        full = (grid, key)
        hit = self._store.get(full)
        if hit is not None:
            self._store.move_to_end(full)
            return hit
        arr = np.asarray(build(grid))
        arr.flags.writeable = False
        if arr.nbytes <= self.budget // 4:
            self._store[full] = arr
            self._bytes += arr.nbytes
            while self._bytes > self.budget and self._store:
                _, old = self._store.popitem(last=False)
                self._bytes -= old.nbytes
        return arr

    def clear(self):
        self._store.clear()
        self._bytes = 0


_CACHE = _MultiplierCache()


def cached_multiplier(grid: Grid, key, build: Callable[[Grid], np.ndarray]) -> np.ndarray:
    return _CACHE.get(grid, key, build)


def clear_caches():
    _CACHE.clear()


def lattice_symbol(grid: Grid, func: Callable[[tuple[np.ndarray, ...]], np.ndarray]) -> np.ndarray:
    """Evaluate a symbol on the half lattice with Nyquist-safe symmetrization.

    The value at xi is (m(xi) + conj(m(xi~)))/2 where xi~ is the partner used by
    the Hermitian pairing.  Away from Nyquist this is m(xi) for any symbol with
    m(-xi) = conj(m(xi)); on Nyquist modes odd symbols vanish and even ones
    are unchanged.  The result keeps whatever broadcast shape `func` returns.
    """
    m = np.asarray(func(grid.frequencies()))
    mt = np.asarray(func(grid.reflected_frequencies()))
    if np.iscomplexobj(m) or np.iscomplexobj(mt):
        out = 0.5 * (m + np.conj(mt))
        if not np.any(out.imag):
            out = out.real.copy()
        return out
    return 0.5 * (m + mt)


def radius_symbol(grid: Grid) -> np.ndarray:
    """|xi| on the half lattice (cached)."""

    def build(g):
        return np.sqrt(sum(k * k for k in np.broadcast_arrays(*g.frequencies())))

    return cached_multiplier(grid, "radius", build)


def _derivative_symbol(grid: Grid, orders: tuple[int, ...]) -> np.ndarray:
    def build(g):
        def func(xi):
            out = np.ones(1, dtype=np.complex128)
            for k, o in zip(xi, orders):
                if o:
                    out = out * (1j * k) ** o
            return out

        return lattice_symbol(g, func)

    return cached_multiplier(grid, ("deriv", orders), build)


def half_weights(grid: Grid) -> np.ndarray:
    """Multiplicity of each half-lattice entry in the full lattice (for Parseval sums)."""

    def build(g):
        n = g.points
        w = np.full(n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        shape = [1] * g.dim
        shape[-1] = w.size
        return w.reshape(shape)

    return cached_multiplier(grid, "half_weights", build)


def spectral_mean_square(grid: Grid, spectrum: np.ndarray) -> float:
    """mean(f^2) computed from an unnormalized half spectrum via Parseval."""
    s = np.abs(spectrum) ** 2 * half_weights(grid)
    return float(s.sum()) / grid.size ** 2


# --------------------------------------------------------------------------
# transforms

def _rfft(grid: Grid, samples: np.ndarray) -> np.ndarray:
    return sfft.rfftn(samples, axes=grid.axes, workers=fft_workers())


def _irfft(grid: Grid, spectrum: np.ndarray) -> np.ndarray:
    return sfft.irfftn(spectrum, s=grid.shape, axes=grid.axes, workers=fft_workers())


def _same_grid(*fields) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples on a Grid; immutable after construction."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        a = np.array(self.samples, dtype=np.float64, copy=True)
        if a.shape != self.grid.shape:
            if a.size != self.grid.size:
                raise ValueError(f"expected {self.grid.size} samples, got {a.size}")
            a = a.reshape(self.grid.shape)
        if not np.isfinite(a).all():
            raise ValueError("field samples must be finite")
        a.flags.writeable = False
        object.__setattr__(self, "samples", a)

    @classmethod
    def _wrap(cls, grid: Grid, samples: np.ndarray, spectrum: np.ndarray | None = None) -> "RealField":
        obj = cls.__new__(cls)
        samples = np.asarray(samples, dtype=np.float64)
        samples.flags.writeable = False
        object.__setattr__(obj, "grid", grid)
        object.__setattr__(obj, "samples", samples)
        if spectrum is not None:
            spectrum.flags.writeable = False
            obj.__dict__["spectrum"] = spectrum
        return obj

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "RealField":
        """Field with the given unnormalized half spectrum (kept as its cached spectrum)."""
        spectrum = np.asarray(spectrum, dtype=np.complex128)
        return cls._wrap(grid, _irfft(grid, spectrum), spectrum)

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[..., np.ndarray], centered: bool = False) -> "RealField":
        x = grid.coordinates(centered)
        vals = np.broadcast_to(np.asarray(func(*x), dtype=np.float64), grid.shape)
        return cls(grid, vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "RealField":
        return cls._wrap(grid, np.zeros(grid.shape), np.zeros(grid.spectral_shape, dtype=np.complex128))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "RealField":
        return cls(grid, np.full(grid.shape, float(value)))

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Unnormalized half spectrum (scipy rfftn layout), read-only."""
        s = _rfft(self.grid, self.samples)
        s.flags.writeable = False
        return s

    @cached_property
    def spectral_extent(self) -> tuple[int, ...]:
        """Largest |k_i| per axis over exactly nonzero coefficients (N/2 marks Nyquist content)."""
        return _spectral_extent(self.grid, self.spectrum)

    def mean(self) -> float:
        return float(self.spectrum.flat[0].real) / self.grid.size

    def at_origin(self) -> float:
        return float(self.samples[(0,) * self.grid.dim])

    def mean_square(self) -> float:
        return float(np.mean(self.samples * self.samples))

    def __add__(self, other):
        if isinstance(other, RealField):
            _same_grid(self, other)
            return RealField._wrap(self.grid, self.samples + other.samples)
        return RealField._wrap(self.grid, self.samples + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, RealField):
            _same_grid(self, other)
            return RealField._wrap(self.grid, self.samples - other.samples)
        return RealField._wrap(self.grid, self.samples - float(other))

    def __neg__(self):
        return RealField._wrap(self.grid, -self.samples)

    def __mul__(self, other):
        if isinstance(other, RealField):
            return pointwise_product(self, other)
        return RealField._wrap(self.grid, self.samples * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other: float):
        return RealField._wrap(self.grid, self.samples / float(other))

    def __repr__(self):
        return f"RealField(grid={self.grid}, mean={self.mean():.3g})"


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Normalized complex coefficients on the full frequency lattice."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if c.shape != self.grid.shape:
            if c.size != self.grid.size:
                raise ValueError(f"expected {self.grid.size} coefficients, got {c.size}")
            c = c.reshape(self.grid.shape)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def coefficient(self, k: Sequence[int]) -> complex:
        idx = tuple(int(v) % self.grid.points for v in k)
        return complex(self.coeffs[idx])

    def hermitian_defect(self) -> float:
        c = self.coeffs
        reflected = np.roll(np.flip(c, axis=self.grid.axes), 1, axis=self.grid.axes)
        return float(np.max(np.abs(c - np.conj(reflected)))) if c.size else 0.0


def forward_transform(f: RealField) -> SpectralField:
    grid = f.grid
    c = sfft.fftn(f.samples, axes=grid.axes, workers=fft_workers()) / grid.size
    return SpectralField(grid, c)


def inverse_transform(F: SpectralField) -> RealField:
    grid = F.grid
    scale = max(1.0, float(np.max(np.abs(F.coeffs))))
    defect = F.hermitian_defect()
    if defect > HERMITIAN_TOL * scale:
        raise SymmetryError(f"coefficients are not Hermitian: defect {defect:.3e}")
    vals = sfft.ifftn(F.coeffs * grid.size, axes=grid.axes, workers=fft_workers())
    return RealField._wrap(grid, np.ascontiguousarray(vals.real))


def apply_multiplier(f: RealField, multiplier: np.ndarray) -> RealField:
    """Multiply the half spectrum of f by a lattice multiplier."""
    return RealField.from_spectrum(f.grid, f.spectrum * multiplier)


def derivative(f: RealField, orders: Sequence[int]) -> RealField:
    """Mixed partial derivative with multi-index `orders` (one entry per axis)."""
    orders = tuple(int(o) for o in orders)
    if len(orders) != f.grid.dim or any(o < 0 for o in orders):
        raise ValueError(f"need {f.grid.dim} nonnegative derivative orders, got {orders}")
    if not any(orders):
        return f
    return apply_multiplier(f, _derivative_symbol(f.grid, orders))


def _unit(dim: int, axis: int, order: int = 1) -> tuple[int, ...]:
    if not 0 <= axis < dim:
        raise ValueError(f"axis {axis} out of range for dimension {dim}")
    return tuple(order if a == axis else 0 for a in range(dim))


def partial_derivative(f: RealField, axis: int) -> RealField:
    return derivative(f, _unit(f.grid.dim, axis))


def pointwise_product(f: RealField, g: RealField) -> RealField:
    """Sample-wise product; no dealiasing."""
    grid = _same_grid(f, g)
    return RealField._wrap(grid, f.samples * g.samples)


def _pad_blocks(dim: int, n: int, m: int):
    """Pairs of (source, destination) index tuples copying retained modes between N and M grids."""
    h = n // 2
    lo = (slice(0, h), slice(0, h))
    hi = (slice(h + 1, n), slice(m - h + 1, m))
    for combo in itertools.product((lo, hi), repeat=dim - 1):
        src = tuple(c[0] for c in combo) + (slice(0, h),)
        dst = tuple(c[1] for c in combo) + (slice(0, h),)
        yield src, dst


def padded_points(grid: Grid) -> int:
    """Points per axis of the 3/2-rule padded grid."""
    return 3 * grid.points // 2


def _pad_spectrum(grid: Grid, m: int, spectrum: np.ndarray) -> np.ndarray:
    out = np.zeros((m,) * (grid.dim - 1) + (m // 2 + 1,), dtype=np.complex128)
    for src, dst in _pad_blocks(grid.dim, grid.points, m):
        out[dst] = spectrum[src]
    out *= (m / grid.points) ** grid.dim
    return out


def _truncate_spectrum(grid: Grid, m: int, spectrum: np.ndarray) -> np.ndarray:
    out = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for src, dst in _pad_blocks(grid.dim, grid.points, m):
        out[src] = spectrum[dst]
    out *= (grid.points / m) ** grid.dim
    return out


def padded_samples(f: RealField, m: int) -> np.ndarray:
    """Samples of f (Nyquist modes dropped) on the finer m-point grid."""
    grid = f.grid
    spec = _pad_spectrum(grid, m, f.spectrum)
    return sfft.irfftn(spec, s=(m,) * grid.dim, axes=grid.axes, workers=fft_workers())


def _spectral_extent(grid: Grid, spectrum: np.ndarray) -> tuple[int, ...]:
    nz = spectrum != 0
    out = []
    for axis in range(grid.dim):
        other = tuple(a for a in range(grid.dim) if a != axis)
        used = np.flatnonzero(nz.any(axis=other)) if other else np.flatnonzero(nz)
        if used.size == 0:
            out.append(0)
            continue
        k = used if axis == grid.dim - 1 else np.where(used < grid.points // 2, used, grid.points - used)
        out.append(int(k.max()))
    return tuple(out)


def product_spectrum(f: RealField, g: RealField, dealias: bool = True) -> np.ndarray:
    """Unnormalized half spectrum of the product f*g.

    When the inputs' spectra are narrow enough that the product cannot
    alias, the dealiased product is taken on the grid itself.
    """
    grid = _same_grid(f, g)
    if not dealias:
        return pointwise_product(f, g).spectrum
    if all(a + b < grid.points // 2 for a, b in zip(f.spectral_extent, g.spectral_extent)):
        return pointwise_product(f, g).spectrum
    m = padded_points(grid)
    fs = padded_samples(f, m)
    gs = fs if g is f else padded_samples(g, m)
    big = sfft.rfftn(fs * gs, axes=grid.axes, workers=fft_workers())
    return _truncate_spectrum(grid, m, big)


def product(f: RealField, g: RealField, dealias: bool = True) -> RealField:
    """Product of two fields; 3/2-rule zero padding unless dealias=False.

    With dealiasing the result is the exact product truncated to the retained
    band |k_i| < N/2 (Nyquist modes of the inputs are dropped).
    """
    if not dealias:
        return pointwise_product(f, g)
    return RealField.from_spectrum(f.grid, product_spectrum(f, g, dealias=True))


def scatter_spectrum(grid: Grid, ks: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Unnormalized half spectrum of sum_k c_k exp(i k.x) for integer lattice vectors k.

    `ks` must be closed under k -> -k with conjugate coefficients and stay
    strictly below the Nyquist index; only entries with last index >= 0 are written.
    """
    ks = np.asarray(ks, dtype=np.int64).reshape(-1, grid.dim)
    if ks.size and np.abs(ks).max() >= grid.points // 2:
        raise ConfigurationError(f"lattice index {np.abs(ks).max()} reaches Nyquist of N={grid.points}")
    spec = np.zeros(grid.spectral_shape, dtype=np.complex128)
    keep = ks[:, -1] >= 0
    idx = tuple((ks[keep, a] % grid.points) if a < grid.dim - 1 else ks[keep, a]
                for a in range(grid.dim))
    np.add.at(spec, idx, np.asarray(coeffs)[keep] * grid.size)
    return spec


# --------------------------------------------------------------------------
# vector fields

@dataclass(frozen=True, eq=False)
class VectorField:
    """n components sharing one grid; `solenoidal=True` is certified on construction."""

    grid: Grid
    components: tuple[RealField, ...]
    solenoidal: bool = False

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.grid.dim:
            raise ValueError(f"expected {self.grid.dim} components, got {len(comps)}")
        for c in comps:
            if not isinstance(c, RealField):
                raise TypeError("components must be RealField instances")
            if c.grid != self.grid:
                raise ValueError("all components must share the vector field's grid")
        object.__setattr__(self, "components", comps)
        if self.solenoidal:
            defect = divergence_defect(self)
            if defect > SOLENOIDAL_FLAG_TOL:
                raise SolenoidalityError(defect)

    @classmethod
    def from_arrays(cls, grid: Grid, arrays: Iterable[np.ndarray], solenoidal: bool = False) -> "VectorField":
        return cls(grid, tuple(RealField(grid, a) for a in arrays), solenoidal)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i: int) -> RealField:
        return self.components[i]

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_grid(self, other)
        return VectorField(self.grid, tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        _same_grid(self, other)
        return VectorField(self.grid, tuple(a - b for a, b in zip(self, other)))

    def __mul__(self, scalar: float) -> "VectorField":
        return VectorField(self.grid, tuple(c * float(scalar) for c in self))

    __rmul__ = __mul__

    def stack(self) -> np.ndarray:
        return np.stack([c.samples for c in self])

    def magnitude(self) -> RealField:
        return RealField._wrap(self.grid, np.sqrt(sum(c.samples * c.samples for c in self)))

    def dot(self, other: "VectorField", dealias: bool = True) -> RealField:
        """Pointwise Euclidean inner product."""
        _same_grid(self, other)
        if not dealias:
            return RealField._wrap(self.grid, sum(a.samples * b.samples for a, b in zip(self, other)))
        spec = sum(product_spectrum(a, b) for a, b in zip(self, other))
        return RealField.from_spectrum(self.grid, spec)


def _divergence_spectrum(u: VectorField) -> np.ndarray:
    grid = u.grid
    return sum(_derivative_symbol(grid, _unit(grid.dim, i)) * c.spectrum for i, c in enumerate(u))


def divergence(u: VectorField) -> RealField:
    return RealField.from_spectrum(u.grid, _divergence_spectrum(u))


def gradient_l2(u: VectorField | RealField) -> float:
    """L2 norm (mean-square convention) of the full gradient, from the spectrum."""
    comps = u.components if isinstance(u, VectorField) else (u,)
    grid = comps[0].grid
    r2 = radius_symbol(grid) ** 2
    w = half_weights(grid)
    total = sum(float(np.sum(np.abs(c.spectrum) ** 2 * r2 * w)) for c in comps)
    return math.sqrt(total) / grid.size


def divergence_defect(u: VectorField) -> float:
    """||div u||_2 / ||grad u||_2 (0 for constant fields)."""
    scale = gradient_l2(u)
    if scale == 0.0:
        return 0.0
    return math.sqrt(spectral_mean_square(u.grid, _divergence_spectrum(u))) / scale


def gradient(f: RealField) -> VectorField:
    return VectorField(f.grid, tuple(partial_derivative(f, a) for a in range(f.grid.dim)))


def perp_gradient(phi: RealField) -> VectorField:
    """(-d2 phi, d1 phi, 0, ..., 0); divergence free by construction."""
    grid = phi.grid
    if grid.dim < 2:
        raise ValueError("perp_gradient needs dimension >= 2")
    comps = [-partial_derivative(phi, 1), partial_derivative(phi, 0)]
    comps += [RealField.zeros(grid) for _ in range(grid.dim - 2)]
    return VectorField(grid, tuple(comps))


def curl(a: VectorField) -> VectorField:
    grid = a.grid
    if grid.dim != 3:
        raise ValueError("curl is defined for dimension 3 only")
    d = lambda c, ax: _derivative_symbol(grid, _unit(3, ax)) * a[c].spectrum  # noqa: E731
    comps = (d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1))
    return VectorField(grid, tuple(RealField.from_spectrum(grid, s) for s in comps))


def curl_defect(g: VectorField) -> float:
    """||curl g||_2 / ||grad g||_2 generalized to all n via the antisymmetric part of grad g."""
    grid = g.grid
    scale = gradient_l2(g)
    if scale == 0.0:
        return 0.0
    total = 0.0
    for i in range(grid.dim):
        for j in range(i + 1, grid.dim):
            s = (_derivative_symbol(grid, _unit(grid.dim, i)) * g[j].spectrum
                 - _derivative_symbol(grid, _unit(grid.dim, j)) * g[i].spectrum)
            total += spectral_mean_square(grid, s)
    return math.sqrt(total) / scale


# --------------------------------------------------------------------------
# golden-file format

_HEADER = struct.Struct("<4sIIId8x")
MAGIC = b"PCAL"
FORMAT_VERSION = 1


def write_field(path, f: RealField) -> None:
    grid = f.grid
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, grid.dim, grid.points, grid.length)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.samples, dtype="<f8").tobytes())


def read_field_header(path) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise ConfigurationError(f"{path}: truncated header")
    magic, version, dim, points, length = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise ConfigurationError(f"{path}: bad magic {magic!r}")
    return {"version": version, "dim": dim, "points": points, "length": length}


def read_field(path) -> RealField:
    head = read_field_header(path)
    if head["version"] != FORMAT_VERSION:
        raise ConfigurationError(f"{path}: unsupported version {head['version']}")
    grid = Grid(head["dim"], head["points"], head["length"])
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != grid.size:
        raise ConfigurationError(f"{path}: expected {grid.size} samples, found {data.size}")
    return RealField(grid, data.astype(np.float64))
