"""Ground-truth SINR maps: noise, SINR, normalisation and a synthetic city."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .grid import GridSignal

PATH_LOSS_EXPONENT = 3.0
WALL_LOSS_DB = 8.0
REFERENCE_DISTANCE = 1.0


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RadioParams:
    k_B: float = 1.38e-23  # J/K
    T_K: float = 290.0
    B_w: float = 50e6  # Hz
    F_sigma: float = 5.0  # noise figure, dB
    f_c: float = 10e9  # Hz; carried for provenance, unused by the path-loss model
    P_tx: float = 1.0  # dBm
    n_tx: int = 100

    def __post_init__(self):
        for name in ("k_B", "T_K", "B_w", "f_c", "n_tx"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class PowerStack:
    """Received power in watts, shape ``(n_tx, height, width)``."""

    p_rx: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_rx, dtype=np.float64)
        if p.ndim != 3 or p.shape[0] < 1:
            raise ValueError("power stack must be (n_tx, height, width) with n_tx >= 1")
        if (p < 0).any() or np.isnan(p).any():
            raise ValueError("received powers must be non-negative")
        object.__setattr__(self, "p_rx", p)

    @property
    def n_tx(self) -> int:
        return self.p_rx.shape[0]

    @property
    def height(self) -> int:
        return self.p_rx.shape[1]

    @property
    def width(self) -> int:
        return self.p_rx.shape[2]


def noise_power(params: RadioParams) -> float:
    return params.k_B * params.T_K * params.B_w * 10.0 ** (params.F_sigma / 10.0)


def sinr(ps: PowerStack, sigma2: float) -> np.ndarray:
    """Best-server SINR per pixel (linear, unbounded)."""
    if sigma2 <= 0:
        raise ValueError("noise power must be positive")
    best = ps.p_rx.max(axis=0)
    interference = ps.p_rx.sum(axis=0) - best
    # rounding can leave a tiny negative remainder when one server dominates
    return best / (sigma2 + np.maximum(interference, 0.0))


def normalize_sinr(raw) -> GridSignal:
    """Map raw SINR to [0, 1] with the best pixel at 0 and the worst at 1."""
    raw = np.asarray(raw, dtype=np.float64)
    hi, lo = raw.max(), raw.min()
    if not hi > lo:
        raise ValueError("degenerate normalization: constant SINR grid")
    return GridSignal(np.clip((hi - raw) / (hi - lo), 0.0, 1.0))


def _wall_crossings(tx, ty, px, py, rect):
    """Boundary crossings of segments (tx, ty)->(px, py) with an axis-aligned rectangle."""
    x0, y0, x1, y1 = rect
    ddx = px - tx
    ddy = py - ty
    t_lo = np.zeros_like(px, dtype=float)
    t_hi = np.ones_like(px, dtype=float)
    hit = np.ones_like(px, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for d, start, lo, hi in ((ddx, tx, x0, x1), (ddy, ty, y0, y1)):
            par = d == 0
            hit &= ~(par & ((start < lo) | (start > hi)))
            ta = np.where(par, -np.inf, (lo - start) / d)
            tb = np.where(par, np.inf, (hi - start) / d)
            t_lo = np.maximum(t_lo, np.minimum(ta, tb))
            t_hi = np.minimum(t_hi, np.maximum(ta, tb))
    hit &= t_lo <= t_hi
    entering = hit & (t_lo > 0)
    leaving = hit & (t_hi < 1)
    return entering.astype(np.int64) + leaving.astype(np.int64)


@dataclass(frozen=True)
class UrbanScene:
    tx: np.ndarray  # (n_tx, 2) pixel coords (x, y)
    buildings: np.ndarray  # (n, 4) rectangles x0, y0, x1, y1
    power: PowerStack


def synth_scene(seed: int, width: int, height: int, params: RadioParams = RadioParams(), n_buildings: int = 20) -> UrbanScene:
    """Random transmitters and rectangular buildings with log-distance path loss.

    Power at distance ``d`` (clamped to 1 px) from a transmitter is
    ``P_tx * d^-3 * 10^(-0.8 * walls)`` where ``walls`` counts building
    boundaries crossed by the straight line between the two pixel centres.
    """
    if width < 1 or height < 1:
        raise ValueError("scene must be at least 1x1")
    rng = np.random.default_rng(seed)
    tx = np.column_stack([rng.integers(0, width, params.n_tx), rng.integers(0, height, params.n_tx)])
    side_lo = max(2, min(width, height) // 32)
    side_hi = max(side_lo + 1, min(width, height) // 6)
    rects = []
    for _ in range(n_buildings):
        w, h = rng.integers(side_lo, side_hi + 1, 2)
        x0 = rng.integers(0, max(1, width - w))
        y0 = rng.integers(0, max(1, height - h))
        rects.append((x0 - 0.5, y0 - 0.5, x0 + w - 0.5, y0 + h - 0.5))
    rects = np.array(rects, dtype=float).reshape(-1, 4)
    ys, xs = np.mgrid[0:height, 0:width].astype(float)
    p_w = dbm_to_watts(params.P_tx)
    power = np.empty((params.n_tx, height, width))
    for i, (x, y) in enumerate(tx):
        d = np.maximum(np.hypot(xs - x, ys - y), REFERENCE_DISTANCE)
        walls = np.zeros((height, width), dtype=np.int64)
        for rect in rects:
            walls += _wall_crossings(float(x), float(y), xs, ys, rect)
        power[i] = p_w * (d / REFERENCE_DISTANCE) ** (-PATH_LOSS_EXPONENT) * 10.0 ** (-WALL_LOSS_DB * walls / 10.0)
    return UrbanScene(tx, rects, PowerStack(power))


def synth_urban(seed: int, width: int, height: int, params: RadioParams = RadioParams(), n_buildings: int = 20) -> PowerStack:
    return synth_scene(seed, width, height, params, n_buildings).power


def synth_normalized(seed: int, size: int, n_tx: int = 10, n_buildings: int = 20, params: RadioParams | None = None) -> GridSignal:
    """Convenience: synthetic scene -> SINR -> normalised ground truth."""
    base = params or RadioParams()
    params = RadioParams(base.k_B, base.T_K, base.B_w, base.F_sigma, base.f_c, base.P_tx, n_tx)
    ps = synth_urban(seed, size, size, params, n_buildings)
    return normalize_sinr(sinr(ps, noise_power(params)))


def read_raw_sinr_csv(path) -> np.ndarray:
    """Raw SINR grid from a CSV with header ``x,y,gamma`` covering every pixel."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["x", "y", "gamma"]:
            raise ValueError(f"expected header x,y,gamma, got {reader.fieldnames}")
        rows = [(int(r["x"]), int(r["y"]), float(r["gamma"])) for r in reader]
    if not rows:
        raise ValueError("empty SINR file")
    width = max(r[0] for r in rows) + 1
    height = max(r[1] for r in rows) + 1
    raw = np.full((height, width), np.nan)
    for x, y, g in rows:
        raw[y, x] = g
    if np.isnan(raw).any() or len(rows) != width * height:
        raise ValueError("SINR file must list every pixel exactly once")
    return raw
