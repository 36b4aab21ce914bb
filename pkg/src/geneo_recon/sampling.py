"""Sparse, optionally corrupted observations of a ground-truth grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .grid import GridSignal, SparseSampling

# substream ids spawned from the user seed
_SELECTION, _CORRUPTION = 0, 1


def _percent_of(percent, n: int) -> int:
    """floor(percent/100 * n), computed exactly for decimal percentages."""
    return math.floor(Fraction(str(percent)) * n / 100)


@dataclass(frozen=True)
class SamplingSpec:
    fraction_known: float  # M, percent of pixels retained
    fraction_corrupt: float = 0.0  # Q, percent of retained samples replaced by noise
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.fraction_known <= 100:
            raise ValueError("fraction_known must be in (0, 100]")
        if not 0 <= self.fraction_corrupt <= 100:
            raise ValueError("fraction_corrupt must be in [0, 100]")

    def _rng(self, stream: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed)
        return np.random.Generator(np.random.PCG64(ss.spawn(2)[stream]))


def sample_count(width: int, height: int, percent) -> int:
    return _percent_of(percent, width * height)


def sample_uniform(gt: GridSignal, spec: SamplingSpec) -> SparseSampling:
    """Draw ``floor(M/100 * L^2)`` distinct pixels uniformly without replacement.

    Samples are returned in row-major order of their coordinates.
    """
    n_pix = gt.width * gt.height
    n = sample_count(gt.width, gt.height, spec.fraction_known)
    if n == 0:
        raise ValueError("empty sampling: M/100 * L^2 rounds down to zero")
    flat = np.sort(spec._rng(_SELECTION).choice(n_pix, size=n, replace=False))
    ys, xs = np.divmod(flat, gt.width)
    return SparseSampling(gt.width, gt.height, xs, ys, gt.values[ys, xs])


def corrupt(s: SparseSampling, spec: SamplingSpec) -> SparseSampling:
    """Replace ``floor(Q/100 * r)`` sample values with independent U(0, 1) draws."""
    n = _percent_of(spec.fraction_corrupt, len(s))
    if n == 0:
        return s
    rng = spec._rng(_CORRUPTION)
    chosen = rng.choice(len(s), size=n, replace=False)
    values = np.array(s.values)
    values[chosen] = rng.random(n)
    return s.with_values(values)


def observe(gt: GridSignal, spec: SamplingSpec) -> SparseSampling:
    return corrupt(sample_uniform(gt, spec), spec)


def gaussian_embed(s: SparseSampling, sigma: float, clamp: bool = True):
    """Gaussian-smeared measurement and reliability fields on the pixel lattice.

    Each sample contributes ``v * exp(-d^2 / (2 sigma^2))`` within radius
    ``4 sigma``.  Returns ``(phi_hat, psi_hat)``; with ``clamp=False`` raw
    arrays are returned instead of :class:`GridSignal`.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    phi = np.zeros((s.height, s.width))
    psi = np.zeros((s.height, s.width))
    reach = int(math.floor(4 * sigma))
    d = np.arange(-reach, reach + 1)
    dy, dx = np.meshgrid(d, d, indexing="ij")
    d2 = dx * dx + dy * dy
    inside = d2 <= (4 * sigma) ** 2
    kernel = np.exp(-d2[inside] / (2 * sigma * sigma))
    dx, dy = dx[inside], dy[inside]
    for x, y, v in zip(s.xs, s.ys, s.values):
        px, py = x + dx, y + dy
        ok = (px >= 0) & (px < s.width) & (py >= 0) & (py < s.height)
        np.add.at(phi, (py[ok], px[ok]), v * kernel[ok])
        np.add.at(psi, (py[ok], px[ok]), kernel[ok])
    if not clamp:
        return phi, psi
    return GridSignal(np.clip(phi, 0, 1)), GridSignal(np.clip(psi, 0, 1))
