"""Pattern-matching reconstruction operator.

For a sampling ``S`` and a pattern ``P = (h, disk)`` the operator computes,
at every anchor ``q`` of the grid,

* ``A(q)``: the fraction of disk pixels around ``q`` that carry a sample,
* ``S(q)``: the mean over the disk of ``|f(q + xi) - h(xi)|`` on sampled pixels,
* ``c(q) = A(q) - S(q)``.

Disk averages divide by the number of lattice points in the disk and pixels
outside the grid count as unsampled.  Reconstruction assigns each pixel the
pattern value of the best ``(pattern, anchor)`` pair whose disk covers it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .grid import GridSignal, SparseSampling
from .patterns import DiskMask, Pattern, PatternLibrary

DEFAULT_CHUNK = 32


def _sample_arrays(s: SparseSampling):
    return (
        np.ascontiguousarray(s.xs, dtype=np.int64),
        np.ascontiguousarray(s.ys, dtype=np.int64),
        np.ascontiguousarray(s.values, dtype=np.float64),
    )


def _offsets(mask: DiskMask):
    dx, dy = mask.offsets
    return np.ascontiguousarray(dx, dtype=np.int32), np.ascontiguousarray(dy, dtype=np.int32)


@dataclass(frozen=True)
class ConfidenceField:
    grid: GridSignal
    pattern_index: int


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    phi_rec: GridSignal
    best_pattern: np.ndarray  # (H, W) library index per pixel
    best_anchor_x: np.ndarray
    best_anchor_y: np.ndarray
    best_confidence: np.ndarray

    def index_grid(self, n_patterns: int) -> GridSignal:
        """Pattern indices rescaled to [0, 1] for export."""
        scale = max(n_patterns - 1, 1)
        return GridSignal(self.best_pattern / scale)


def reliability_counts(s: SparseSampling, mask: DiskMask, kernels=None) -> np.ndarray:
    k = kernels or _backend.kernels
    xs, ys, _ = _sample_arrays(s)
    dx, dy = _offsets(mask)
    return k.hit_counts(xs, ys, dx, dy, s.width, s.height)


def reliability_field(s: SparseSampling, mask: DiskMask, kernels=None) -> GridSignal:
    return GridSignal(reliability_counts(s, mask, kernels) / mask.area)


def _confidence_block(s, lib_values, mask, counts, kernels):
    """Confidence fields for a block of patterns, shape ``(n, H, W)``."""
    xs, ys, vals = _sample_arrays(s)
    dx, dy = _offsets(mask)
    sums = kernels.mismatch_sums(xs, ys, vals, dx, dy, lib_values, s.width, s.height)
    area = float(mask.area)
    return counts[None, :, :] / area - sums / area


def mismatch_field(s: SparseSampling, p: Pattern, kernels=None) -> GridSignal:
    k = kernels or _backend.kernels
    xs, ys, vals = _sample_arrays(s)
    dx, dy = _offsets(p.mask)
    h = np.ascontiguousarray(p.h[p.mask.bits][None, :])
    sums = k.mismatch_sums(xs, ys, vals, dx, dy, h, s.width, s.height)
    return GridSignal(sums[0] / p.mask.area)


def confidence_field(s: SparseSampling, p: Pattern, index: int = 0, kernels=None) -> ConfidenceField:
    k = kernels or _backend.kernels
    counts = reliability_counts(s, p.mask, k)
    h = np.ascontiguousarray(p.h[p.mask.bits][None, :])
    return ConfidenceField(GridSignal(_confidence_block(s, h, p.mask, counts, k)[0]), index)


def confidence_stack(s: SparseSampling, lib: PatternLibrary, kernels=None) -> list[ConfidenceField]:
    if len(lib) == 0:
        raise ValueError("pattern library is empty")
    k = kernels or _backend.kernels
    counts = reliability_counts(s, lib.mask, k)
    fields = _confidence_block(s, lib.disk_values(), lib.mask, counts, k)
    return [ConfidenceField(GridSignal(f), i) for i, f in enumerate(fields)]


def _finish(best_c, best_i, lib: PatternLibrary, kernels) -> ReconstructionResult:
    dx, dy = _offsets(lib.mask)
    ax, ay = kernels.disk_argmax(best_c, best_i, dx, dy)
    height, width = best_c.shape
    ys, xs = np.mgrid[0:height, 0:width]
    idx = best_i[ay, ax]
    r = lib.radius
    phi = np.zeros((height, width))
    for i in np.unique(idx):
        sel = idx == i
        phi[sel] = lib[int(i)].h[ys[sel] - ay[sel] + r, xs[sel] - ax[sel] + r]
    return ReconstructionResult(
        phi_rec=GridSignal(phi),
        best_pattern=idx,
        best_anchor_x=ax,
        best_anchor_y=ay,
        best_confidence=best_c[ay, ax],
    )


def reconstruct(stack: list[ConfidenceField], lib: PatternLibrary, kernels=None) -> ReconstructionResult:
    """Per-pixel argmax of confidence over patterns and covering anchors.

    Ties go to the smaller pattern index, then the row-major-first anchor.
    """
    if len(stack) != len(lib) or len(lib) == 0:
        raise ValueError("confidence stack must align with a non-empty library")
    k = kernels or _backend.kernels
    height, width = stack[0].grid.shape
    best_c = np.full((height, width), -np.inf)
    best_i = np.zeros((height, width), dtype=np.int64)
    for cf in stack:
        k.argmax_update(best_c, best_i, np.ascontiguousarray(cf.grid.values[None]), cf.pattern_index)
    return _finish(best_c, best_i, lib, k)


def reconstruct_sampling(
    s: SparseSampling,
    lib: PatternLibrary,
    chunk: int = DEFAULT_CHUNK,
    workers: int | None = None,
    kernels=None,
) -> ReconstructionResult:
    """Stream the library in chunks, keeping only the running per-anchor max.

    Chunks may be evaluated on several threads; they are folded into the
    running max in ascending pattern order, so the result does not depend on
    ``workers``.
    """
    if len(lib) == 0:
        raise ValueError("pattern library is empty")
    k = kernels or _backend.kernels
    workers = workers or int(os.environ.get("GENEO_RECON_WORKERS", "1"))
    counts = reliability_counts(s, lib.mask, k)
    best_c = np.full((s.height, s.width), -np.inf)
    best_i = np.zeros((s.height, s.width), dtype=np.int64)
    starts = list(range(0, len(lib), chunk))

    def block(start):
        return _confidence_block(s, lib.disk_values(start, start + chunk), lib.mask, counts, k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map yields in submission order; keep a bounded window in flight
            window = 2 * workers
            for lo in range(0, len(starts), window):
                group = starts[lo : lo + window]
                for start, fields in zip(group, pool.map(block, group)):
                    k.argmax_update(best_c, best_i, np.ascontiguousarray(fields), start)
    else:
        for start in starts:
            k.argmax_update(best_c, best_i, np.ascontiguousarray(block(start)), start)
    return _finish(best_c, best_i, lib, k)
