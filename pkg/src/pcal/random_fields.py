"""Reproducible random band-limited fields.

Coefficients are drawn on the lattice points |k| <= band only, in an order
that does not depend on the grid size, so one seed gives the same function on
every grid that resolves the band.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ResolutionError
from .fields import Grid, RealField, VectorField, curl, gradient, perp_gradient, scatter_spectrum

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, index: int) -> int:
    """Per-row seed from (master seed, row index)."""
    return splitmix64((splitmix64(int(master) & MASK64) ^ int(index)) & MASK64)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _band_points(dim: int, kmax: int) -> np.ndarray:
    r = np.arange(-kmax, kmax + 1)
    pts = np.stack(np.meshgrid(*([r] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    return pts


def random_scalar(grid: Grid, seed, band: float = 8.0, beta: float | None = None,
                  zero_mean: bool = True, normalize: bool = True) -> RealField:
    """Random real field with |coefficient| ~ |xi|^-beta on 0 < |xi| <= band.

    beta defaults to a random value in [1, 3] drawn from the same stream.
    """
    rng = _rng(seed)
    if beta is None:
        beta = float(rng.uniform(1.0, 3.0))
    kmax = int(math.floor(band / grid.fundamental + 1e-9))
    if kmax < 1:
        raise ResolutionError(f"band {band} holds no nonzero lattice frequency")
    if kmax >= grid.points // 2:
        raise ResolutionError(f"band {band} reaches the Nyquist frequency of N={grid.points}")
    ks = _band_points(grid.dim, kmax)
    z = rng.standard_normal(len(ks)) + 1j * rng.standard_normal(len(ks))
    radius = np.sqrt((ks.astype(float) ** 2).sum(axis=1)) * grid.fundamental
    inside = (radius <= band * (1 + 1e-12)) & (radius > 0)
    amp = np.where(inside, np.where(radius > 0, radius, 1.0) ** -beta, 0.0)
    if not zero_mean:
        amp = np.where(radius == 0, 1.0, amp)
    c = z * amp
    # Hermitian partner of entry i sits at len-1-i because the lattice is symmetric
    c = 0.5 * (c + np.conj(c[::-1]))
    f = RealField.from_spectrum(grid, scatter_spectrum(grid, ks, c))
    if normalize:
        rms = math.sqrt(f.mean_square())
        if rms > 0:
            f = RealField.from_spectrum(grid, f.spectrum / rms)
    return f


def random_solenoidal(grid: Grid, seed, band: float = 8.0, beta: float | None = None) -> VectorField:
    """Divergence-free field: perp gradient of a stream function (n=2) or curl of a potential (n=3).

    Velocity coefficients decay like |xi|^-beta, so potentials use beta + 1.
    Other dimensions use the Leray projection of a random vector field.
    """
    rng = _rng(seed)
    if beta is None:
        beta = float(rng.uniform(1.0, 3.0))
    n = grid.dim
    if n == 2:
        u = perp_gradient(random_scalar(grid, rng, band, beta + 1.0, normalize=False))
    elif n == 3:
        pot = VectorField(grid, tuple(random_scalar(grid, rng, band, beta + 1.0, normalize=False)
                                      for _ in range(3)))
        u = curl(pot)
    elif n >= 4:
        w = [random_scalar(grid, rng, band, beta, normalize=False) for _ in range(n)]
        u = leray_projection(VectorField(grid, tuple(w)))
    else:
        raise ValueError("divergence-free fields need dimension >= 2")
    return _normalize_vector(u, solenoidal=True)


def random_gradient(grid: Grid, seed, band: float = 8.0, beta: float | None = None) -> VectorField:
    """Curl-free field grad psi with random potential psi."""
    rng = _rng(seed)
    if beta is None:
        beta = float(rng.uniform(1.0, 3.0))
    return _normalize_vector(gradient(random_scalar(grid, rng, band, beta + 1.0, normalize=False)))


def leray_projection(w: VectorField) -> VectorField:
    from .lp import riesz_double

    grid = w.grid
    comps = []
    for i in range(grid.dim):
        acc = w[i]
        for k in range(grid.dim):
            acc = acc - riesz_double(w[k], i, k)
        comps.append(acc)
    return VectorField(grid, tuple(comps))


def _normalize_vector(u: VectorField, solenoidal: bool = False) -> VectorField:
    rms = math.sqrt(sum(c.mean_square() for c in u))
    if rms == 0:
        return u
    comps = tuple(RealField.from_spectrum(u.grid, c.spectrum / rms) for c in u)
    return VectorField(u.grid, comps, solenoidal=solenoidal)
