"""Disk-supported templates: tiling, extraction, rotation and the library file."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .grid import GridFormatError, GridSignal, PixelCoord

LIBRARY_MAGIC = b"PLB1"
ROTATION_STEP = 15
N_ROTATIONS = 360 // ROTATION_STEP

# Lattice pitch limits, in units of the radius.  The column pitch is the side
# of a triangular lattice whose covering radius equals the disk radius; the
# row pitch is calibrated so that a 270 px square at radius 22 gets 67 disks.
_COL_PITCH = math.sqrt(3.0)
_ROW_PITCH = 1.3


@dataclass(frozen=True)
class DiskMask:
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be non-negative")

    @property
    def size(self) -> int:
        return 2 * self.radius + 1

    @cached_property
    def bits(self) -> np.ndarray:
        d = np.arange(-self.radius, self.radius + 1)
        dy, dx = np.meshgrid(d, d, indexing="ij")
        b = dx * dx + dy * dy <= self.radius * self.radius
        b.setflags(write=False)
        return b

    @cached_property
    def offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """(dx, dy) of the support in row-major bounding-box order."""
        dy, dx = np.nonzero(self.bits)
        dx = (dx - self.radius).astype(np.int32)
        dy = (dy - self.radius).astype(np.int32)
        dx.setflags(write=False)
        dy.setflags(write=False)
        return dx, dy

    @property
    def area(self) -> int:
        """Lattice points in the disk."""
        return int(self.bits.sum())


@dataclass(frozen=True)
class PatternMeta:
    area_id: int = 0
    center: PixelCoord = PixelCoord(0, 0)
    rotation_degrees: int = 0


@dataclass(frozen=True, eq=False)
class Pattern:
    """Template values ``h`` on the bounding box of ``mask`` (zero off support)."""

    h: np.ndarray
    mask: DiskMask
    meta: PatternMeta = field(default_factory=PatternMeta)

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64, copy=True)
        if h.shape != (self.mask.size, self.mask.size):
            raise ValueError(f"pattern values must be {self.mask.size}x{self.mask.size}")
        h[~self.mask.bits] = 0.0
        if np.isnan(h).any() or h.min() < 0 or h.max() > 1:
            raise ValueError("pattern values must lie in [0, 1]")
        if self.meta.rotation_degrees % ROTATION_STEP or not 0 <= self.meta.rotation_degrees < 360:
            raise ValueError("rotation must be a multiple of 15 in [0, 360)")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def radius(self) -> int:
        return self.mask.radius

    def __eq__(self, other):
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.mask == other.mask and self.meta == other.meta and np.array_equal(self.h, other.h)

    def at(self, dx: int, dy: int) -> float:
        return float(self.h[dy + self.radius, dx + self.radius])


class PatternLibrary:
    """Ordered patterns sharing one disk support."""

    def __init__(self, radius: int, patterns=()):
        self.mask = DiskMask(radius)
        self.patterns: list[Pattern] = list(patterns)
        for p in self.patterns:
            if p.mask != self.mask:
                raise ValueError("all patterns in a library must share the same radius")

    @property
    def radius(self) -> int:
        return self.mask.radius

    def __len__(self):
        return len(self.patterns)

    def __getitem__(self, i) -> Pattern:
        return self.patterns[i]

    def __iter__(self):
        return iter(self.patterns)

    def __eq__(self, other):
        if not isinstance(other, PatternLibrary):
            return NotImplemented
        return self.radius == other.radius and self.patterns == other.patterns

    def disk_values(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Pattern values at the disk offsets, shape ``(n, |D|)``, C-contiguous."""
        bits = self.mask.bits
        chunk = self.patterns[start:stop]
        if not chunk:
            return np.zeros((0, self.mask.area))
        return np.ascontiguousarray(np.stack([p.h[bits] for p in chunk]))

    def concat(self, other: "PatternLibrary") -> "PatternLibrary":
        return PatternLibrary(self.radius, self.patterns + other.patterns)


def _axis(lo: int, hi: int, pitch: float) -> np.ndarray:
    n = max(1, math.ceil((hi - lo) / pitch - 1e-9)) + 1 if hi > lo else 1
    return np.linspace(lo, hi, n) if n > 1 else np.array([float(lo)])


def tile_circles(width: int, height: int, radius: int) -> list[PixelCoord]:
    """Centers of a staggered disk tiling whose bounding boxes stay in the area.

    Rows are spread evenly between ``radius`` and ``height - 1 - radius``.
    Even rows hold evenly spaced columns; odd rows are shifted half a pitch
    and get an extra clamped center at each end so that the side margins are
    covered.  Centers are returned row by row, left to right.
    """
    if width < 2 * radius + 1 or height < 2 * radius + 1:
        raise ValueError(f"a {width}x{height} area cannot hold a disk of radius {radius}")
    lo_x, hi_x = radius, width - 1 - radius
    lo_y, hi_y = radius, height - 1 - radius
    ys = _axis(lo_y, hi_y, _ROW_PITCH * radius) if radius else np.arange(lo_y, hi_y + 1.0)
    xs_even = _axis(lo_x, hi_x, _COL_PITCH * radius) if radius else np.arange(lo_x, hi_x + 1.0)
    if len(xs_even) > 1:
        half = (xs_even[1] - xs_even[0]) / 2
        xs_odd = np.concatenate([[lo_x], xs_even[:-1] + half, [hi_x]])
    else:
        xs_odd = xs_even
    centers: list[PixelCoord] = []
    for row, y in enumerate(ys):
        seen = set()
        for x in xs_odd if row % 2 else xs_even:
            c = PixelCoord(int(math.floor(x + 0.5)), int(math.floor(y + 0.5)))
            if c not in seen:
                seen.add(c)
                centers.append(c)
    return centers


def coverage_distance(width: int, height: int, centers) -> np.ndarray:
    """Per-pixel Euclidean distance to the nearest center."""
    from scipy.spatial import cKDTree

    ys, xs = np.mgrid[0:height, 0:width]
    tree = cKDTree(np.asarray(centers, dtype=float))
    d, _ = tree.query(np.column_stack([xs.ravel(), ys.ravel()]))
    return d.reshape(height, width)


def extract_patterns(gt: GridSignal, centers, radius: int, area_id: int = 0) -> PatternLibrary:
    mask = DiskMask(radius)
    out = []
    for cx, cy in centers:
        if cx - radius < 0 or cy - radius < 0 or cx + radius >= gt.width or cy + radius >= gt.height:
            raise ValueError(f"disk at ({cx}, {cy}) with radius {radius} leaves the grid")
        window = gt.values[cy - radius : cy + radius + 1, cx - radius : cx + radius + 1]
        out.append(Pattern(window, mask, PatternMeta(area_id, PixelCoord(int(cx), int(cy)), 0)))
    return PatternLibrary(radius, out)


def _exact_trig(theta: int) -> tuple[float, float]:
    quarter = {0: (1.0, 0.0), 90: (0.0, 1.0), 180: (-1.0, 0.0), 270: (0.0, -1.0)}
    if theta in quarter:
        return quarter[theta]
    t = math.radians(theta)
    return math.cos(t), math.sin(t)


def rotate_pattern(p: Pattern, theta: int) -> Pattern:
    """Rotate a pattern by ``theta`` degrees: ``h'(u) = h(R(-theta) u)``.

    Off-lattice positions are bilinearly interpolated from the neighbouring
    support pixels (weights renormalised over the ones inside the disk).
    A quarter turn maps ``h'(dx, dy) = h(dy, -dx)`` exactly.
    """
    if theta % ROTATION_STEP or not 0 <= theta < 360:
        raise ValueError(f"rotation {theta} is not a multiple of 15 in [0, 360)")
    total = (p.meta.rotation_degrees + theta) % 360
    meta = PatternMeta(p.meta.area_id, p.meta.center, total)
    if theta == 0:
        return Pattern(p.h, p.mask, meta)
    r = p.radius
    c, s = _exact_trig(theta)
    dx, dy = p.mask.offsets
    # back-rotated sample position in pattern coordinates
    vx = c * dx + s * dy
    vy = -s * dx + c * dy
    x0 = np.floor(vx).astype(int)
    y0 = np.floor(vy).astype(int)
    fx = vx - x0
    fy = vy - y0
    bits = p.mask.bits
    acc = np.zeros(len(dx))
    wsum = np.zeros(len(dx))
    for ox, oy, w in (
        (0, 0, (1 - fx) * (1 - fy)),
        (1, 0, fx * (1 - fy)),
        (0, 1, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        nx, ny = x0 + ox, y0 + oy
        inbox = (np.abs(nx) <= r) & (np.abs(ny) <= r)
        ok = np.zeros(len(dx), dtype=bool)
        ok[inbox] = bits[ny[inbox] + r, nx[inbox] + r]
        w = np.where(ok, w, 0.0)
        vals = np.zeros(len(dx))
        vals[ok] = p.h[ny[ok] + r, nx[ok] + r]
        acc += w * vals
        wsum += w
    out = np.zeros_like(p.h)
    safe = wsum > 0
    res = np.zeros(len(dx))
    res[safe] = acc[safe] / wsum[safe]
    out[dy + r, dx + r] = np.clip(res, 0.0, 1.0)
    return Pattern(out, p.mask, meta)


def augment_rotations(lib: PatternLibrary, step: int = ROTATION_STEP) -> PatternLibrary:
    """Expand every base pattern into its rotations ``0, step, ..., 360 - step``."""
    if step <= 0 or step % ROTATION_STEP or 360 % step:
        raise ValueError("rotation step must be a positive multiple of 15 dividing 360")
    if any(p.meta.rotation_degrees for p in lib):
        raise ValueError("augment_rotations expects unrotated patterns")
    out = []
    for p in lib:
        out.extend(rotate_pattern(p, theta) for theta in range(0, 360, step))
    return PatternLibrary(lib.radius, out)


def build_library(areas, radius: int, rotation_step: int = ROTATION_STEP, area_ids=None) -> PatternLibrary:
    """Tile, extract and rotate every area, concatenated in area order."""
    lib = PatternLibrary(radius)
    for k, gt in enumerate(areas):
        aid = k if area_ids is None else area_ids[k]
        centers = tile_circles(gt.width, gt.height, radius)
        base = extract_patterns(gt, centers, radius, area_id=aid)
        lib = lib.concat(augment_rotations(base, rotation_step))
    return lib


# -- .plb ------------------------------------------------------------------

_LIB_HEADER = struct.Struct("<4sII")
_PAT_HEADER = struct.Struct("<IIIH")


def write_library(lib: PatternLibrary) -> bytes:
    parts = [_LIB_HEADER.pack(LIBRARY_MAGIC, lib.radius, len(lib))]
    for p in lib:
        m = p.meta
        parts.append(_PAT_HEADER.pack(m.area_id, m.center.x, m.center.y, m.rotation_degrees))
        parts.append(p.h.astype("<f4").tobytes(order="C"))
    return b"".join(parts)


def read_library(data: bytes) -> PatternLibrary:
    if len(data) < _LIB_HEADER.size:
        raise GridFormatError("library file shorter than its header")
    magic, radius, count = _LIB_HEADER.unpack_from(data)
    if magic != LIBRARY_MAGIC:
        raise GridFormatError(f"bad library magic {magic!r}")
    side = 2 * radius + 1
    rec = _PAT_HEADER.size + 4 * side * side
    if len(data) != _LIB_HEADER.size + count * rec:
        raise GridFormatError("library size does not match its declared count")
    mask = DiskMask(radius)
    pats = []
    off = _LIB_HEADER.size
    for _ in range(count):
        aid, cx, cy, rot = _PAT_HEADER.unpack_from(data, off)
        off += _PAT_HEADER.size
        h = np.frombuffer(data, dtype="<f4", count=side * side, offset=off).reshape(side, side)
        off += 4 * side * side
        pats.append(Pattern(h.astype(np.float64), mask, PatternMeta(aid, PixelCoord(cx, cy), rot)))
    return PatternLibrary(radius, pats)


def save_library(path, lib: PatternLibrary) -> None:
    with open(path, "wb") as fh:
        fh.write(write_library(lib))


def load_library(path) -> PatternLibrary:
    with open(path, "rb") as fh:
        return read_library(fh.read())
