"""Grid data types and on-disk formats.

Coordinates are ``(x, y) = (column, row)`` with the origin at the top-left
pixel; arrays are stored row-major with shape ``(height, width)``.  One pixel
is one metre.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

GRID_MAGIC = b"GRD1"
_GRID_HEADER = struct.Struct("<4sII")


class GridFormatError(ValueError):
    """Base class for malformed grid or sampling files."""


class BadMagicError(GridFormatError):
    pass


class SizeMismatchError(GridFormatError):
    pass


class ValueRangeError(GridFormatError):
    pass


def _check_unit_interval(values: np.ndarray, what: str, exc=ValueError) -> None:
    if values.size and (np.isnan(values).any() or values.min() < 0.0 or values.max() > 1.0):
        raise exc(f"{what}: values must lie in [0, 1] and not be NaN")


class PixelCoord(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True, eq=False)
class GridSignal:
    """Dense field of values in [0, 1] on a ``height x width`` lattice."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"grid must be a non-empty 2D array, got shape {v.shape}")
        _check_unit_interval(v, "GridSignal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __getitem__(self, coord) -> float:
        x, y = coord
        return float(self.values[y, x])

    def __eq__(self, other):
        if not isinstance(other, GridSignal):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"GridSignal({self.width}x{self.height})"

    @classmethod
    def constant(cls, width: int, height: int, value: float) -> "GridSignal":
        return cls(np.full((height, width), value, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class SparseSampling:
    """Measured values at distinct pixels of a ``width x height`` grid.

    This is the delta representation of the pair (measurement field,
    reliability mask): the mask is 1 exactly at the listed coordinates.
    """

    width: int
    height: int
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("sampling grid must be at least 1x1")
        xs = np.array(self.xs, dtype=np.int64).reshape(-1)
        ys = np.array(self.ys, dtype=np.int64).reshape(-1)
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if not (len(xs) == len(ys) == len(vals)):
            raise ValueError("xs, ys and values must have equal length")
        if len(xs):
            if xs.min() < 0 or ys.min() < 0 or xs.max() >= self.width or ys.max() >= self.height:
                raise ValueError("sample coordinate out of bounds")
            flat = ys * self.width + xs
            if len(np.unique(flat)) != len(flat):
                raise ValueError("sample coordinates must be distinct")
        _check_unit_interval(vals, "SparseSampling")
        for name, arr in (("xs", xs), ("ys", ys), ("values", vals)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.xs)

    def __eq__(self, other):
        if not isinstance(other, SparseSampling):
            return NotImplemented
        return (
            (self.width, self.height) == (other.width, other.height)
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.ys, other.ys)
            and np.array_equal(self.values, other.values)
        )

    @property
    def coords(self) -> list[PixelCoord]:
        return [PixelCoord(int(x), int(y)) for x, y in zip(self.xs, self.ys)]

    def with_values(self, values) -> "SparseSampling":
        return SparseSampling(self.width, self.height, self.xs, self.ys, values)

    def dense_values(self) -> np.ndarray:
        """Measurement field with zeros off-sample."""
        out = np.zeros((self.height, self.width))
        out[self.ys, self.xs] = self.values
        return out

    @classmethod
    def from_pairs(cls, width, height, samples) -> "SparseSampling":
        samples = list(samples)
        xs = [c[0] for c, _ in samples]
        ys = [c[1] for c, _ in samples]
        return cls(width, height, xs, ys, [v for _, v in samples])


@dataclass(frozen=True, eq=False)
class ReliabilityMask:
    bits: np.ndarray

    def __post_init__(self):
        b = np.array(self.bits, dtype=bool, copy=True)
        if b.ndim != 2:
            raise ValueError("mask must be 2D")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def popcount(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, ReliabilityMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))


def mask_of(sampling: SparseSampling) -> ReliabilityMask:
    bits = np.zeros((sampling.height, sampling.width), dtype=bool)
    bits[sampling.ys, sampling.xs] = True
    return ReliabilityMask(bits)


# -- .grd ------------------------------------------------------------------

def write_grid(grid: GridSignal) -> bytes:
    header = _GRID_HEADER.pack(GRID_MAGIC, grid.width, grid.height)
    return header + grid.values.astype("<f4").tobytes(order="C")


def read_grid(data: bytes) -> GridSignal:
    if len(data) < _GRID_HEADER.size:
        raise SizeMismatchError("file shorter than the grid header")
    magic, width, height = _GRID_HEADER.unpack_from(data)
    if magic != GRID_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {GRID_MAGIC!r}")
    expected = _GRID_HEADER.size + 4 * width * height
    if width < 1 or height < 1 or len(data) != expected:
        raise SizeMismatchError(
            f"declared {width}x{height} needs {expected} bytes, got {len(data)}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=_GRID_HEADER.size).reshape(height, width)
    values = values.astype(np.float64)
    _check_unit_interval(values, "grid file", ValueRangeError)
    return GridSignal(values)


def save_grid(path, grid: GridSignal) -> None:
    with open(path, "wb") as fh:
        fh.write(write_grid(grid))


def load_grid(path) -> GridSignal:
    with open(path, "rb") as fh:
        return read_grid(fh.read())


# -- .smp ------------------------------------------------------------------
# The CSV body is `x,y,value`.  A leading `# grid WxH` comment carries the
# grid size, which the body alone cannot determine.

def write_sampling(sampling: SparseSampling) -> str:
    buf = io.StringIO()
    buf.write(f"# grid {sampling.width}x{sampling.height}\n")
    buf.write("x,y,value\n")
    for x, y, v in zip(sampling.xs, sampling.ys, sampling.values):
        buf.write(f"{int(x)},{int(y)},{float(v)!r}\n")
    return buf.getvalue()


def read_sampling(text: str, width: int | None = None, height: int | None = None) -> SparseSampling:
    lines = text.splitlines()
    if lines and lines[0].startswith("#"):
        comment = lines.pop(0)[1:].split()
        if len(comment) == 2 and comment[0] == "grid":
            w, h = (int(t) for t in comment[1].split("x"))
            width = w if width is None else width
            height = h if height is None else height
    if width is None or height is None:
        raise GridFormatError("sampling file has no grid size; pass width and height")
    reader = csv.DictReader(lines)
    if reader.fieldnames != ["x", "y", "value"]:
        raise GridFormatError(f"expected header x,y,value, got {reader.fieldnames}")
    xs, ys, vals = [], [], []
    for row in reader:
        xs.append(int(row["x"]))
        ys.append(int(row["y"]))
        vals.append(float(row["value"]))
    return SparseSampling(width, height, xs, ys, vals)


def save_sampling(path, sampling: SparseSampling) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(write_sampling(sampling))


def load_sampling(path, width=None, height=None) -> SparseSampling:
    with open(path, encoding="utf-8") as fh:
        return read_sampling(fh.read(), width, height)


# -- .pgm ------------------------------------------------------------------

def write_pgm(grid: GridSignal) -> bytes:
    """16-bit binary graymap; PGM stores 2-byte samples big-endian."""
    header = f"P5\n{grid.width} {grid.height}\n65535\n".encode("ascii")
    levels = np.rint(grid.values * 65535.0).astype(">u2")
    return header + levels.tobytes(order="C")


def save_pgm(path, grid: GridSignal) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(grid))
