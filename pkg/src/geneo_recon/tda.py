"""Sublevel-set cubical persistence (H0, H1) and Wasserstein distances.

Pixels are vertices; 4-neighbours are joined by edges and every 2x2 block
spans a square, each cell entering at the maximum of its vertices.  Equal
values are ordered row-major.  H0 follows the elder rule on 4-connected
components; H1 is read off the 8-connected complement grown from the top
down (with the region outside the grid as the oldest component), which is
the dual description of the same filtration.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _backend
from .grid import GridSignal

INF = math.inf


@dataclass(frozen=True)
class PersistencePoint:
    birth: float
    death: float = INF  # INF marks an essential class

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    dimension: int
    points: tuple[PersistencePoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points, key=lambda p: (p.birth, p.death))))

    def __len__(self):
        return len(self.points)

    def finite(self) -> list[PersistencePoint]:
        return [p for p in self.points if not p.essential]

    def essentials(self) -> list[PersistencePoint]:
        return [p for p in self.points if p.essential]

    def as_pairs(self) -> list[tuple[float, float]]:
        return [(p.birth, p.death) for p in self.points]


def _filtration_order(values: np.ndarray) -> np.ndarray:
    flat = values.ravel()
    return np.lexsort((np.arange(flat.size), flat)).astype(np.int64)


def sublevel_persistence(g, kernels=None) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """H0 and H1 diagrams of the sublevel filtration; zero-length pairs dropped."""
    values = g.values if isinstance(g, GridSignal) else np.asarray(g, dtype=np.float64)
    k = kernels or _backend.kernels
    height, width = values.shape
    flat = values.ravel()
    order = _filtration_order(values)
    h0, root = k.h0_pairs(order, width, height)
    h1 = k.h1_pairs(order, width, height)
    pts0 = [PersistencePoint(flat[b], flat[d]) for b, d in h0 if flat[b] != flat[d]]
    pts0.append(PersistencePoint(flat[root]))
    pts1 = [PersistencePoint(flat[b], flat[d]) for b, d in h1 if flat[b] != flat[d]]
    return PersistenceDiagram(0, tuple(pts0)), PersistenceDiagram(1, tuple(pts1))


def _finite_cost(a, b, p):
    """Assignment matrix for finite points with diagonal slots."""
    n, m = len(a), len(b)
    big = np.inf
    cost = np.zeros((n + m, n + m))
    if n and m:
        A = np.array(a)[:, None, :]
        B = np.array(b)[None, :, :]
        cost[:n, :m] = np.abs(A - B).max(axis=2) ** p
    diag_a = (np.array([d - b_ for b_, d in a]) / 2) ** p if n else np.zeros(0)
    diag_b = (np.array([d - b_ for b_, d in b]) / 2) ** p if m else np.zeros(0)
    cost[:n, m:] = big
    cost[n:, :m] = big
    cost[:n, m:][np.arange(n), np.arange(n)] = diag_a
    cost[n:, :m][np.arange(m), np.arange(m)] = diag_b
    return cost


def _matching_cost(a, b, p) -> float:
    """Sum of ``||x - gamma(x)||_inf^p`` over an optimal augmented bijection."""
    if not a and not b:
        return 0.0
    cost = _finite_cost(a, b, p)
    # linear_sum_assignment rejects inf entries; any finite value above the
    # total of all finite entries is never chosen by an optimal solution
    finite = np.isfinite(cost)
    cost[~finite] = cost[finite].sum() + 1.0
    rows, cols = linear_sum_assignment(cost)
    return math.fsum(cost[rows, cols])


def wasserstein(d1: PersistenceDiagram, d2: PersistenceDiagram, p: int = 1, essential_death: float | None = None) -> float:
    """p-Wasserstein distance with the L-infinity ground metric.

    Essential classes only match each other.  With ``essential_death`` their
    deaths are replaced by that value; surplus essentials then go to the
    diagonal.  Without it, surplus essentials make the distance infinite.
    """
    if d1.dimension != d2.dimension:
        raise ValueError(f"cannot compare H{d1.dimension} with H{d2.dimension}")
    if p < 1:
        raise ValueError("p must be a positive integer")
    # a canonical argument order makes the result exactly symmetric
    if (len(d2), d2.as_pairs()) < (len(d1), d1.as_pairs()):
        d1, d2 = d2, d1
    fa = [(q.birth, q.death) for q in d1.finite()]
    fb = [(q.birth, q.death) for q in d2.finite()]
    total = _matching_cost(fa, fb, p)
    ea = [q.birth for q in d1.essentials()]
    eb = [q.birth for q in d2.essentials()]
    if ea or eb:
        if essential_death is None:
            if len(ea) != len(eb):
                return INF
            # births on a line: sorted order is optimal for |.|^p, p >= 1
            total += math.fsum(abs(x - y) ** p for x, y in zip(sorted(ea), sorted(eb)))
        else:
            t = essential_death
            total += _essential_cost([(x, t) for x in ea], [(y, t) for y in eb], p)
    return total ** (1.0 / p)


def _essential_cost(a, b, p) -> float:
    if not a or not b:
        return math.fsum(((d - b_) / 2) ** p for b_, d in a + b)
    n, m = len(a), len(b)
    cost = np.zeros((max(n, m), max(n, m)))
    A = np.array(a)[:, None, :]
    B = np.array(b)[None, :, :]
    cost[:n, :m] = np.abs(A - B).max(axis=2) ** p
    # padding rows/cols send the surplus to the diagonal
    for i, (b_, d) in enumerate(a):
        cost[i, m:] = ((d - b_) / 2) ** p
    for j, (b_, d) in enumerate(b):
        cost[n:, j] = ((d - b_) / 2) ** p
    rows, cols = linear_sum_assignment(cost)
    return math.fsum(cost[rows, cols])


@dataclass(frozen=True)
class TopoDistance:
    h0: float
    h1: float

    @property
    def total(self) -> float:
        return self.h0 + self.h1


def topo_distances(g1: GridSignal, g2: GridSignal, kernels=None) -> TopoDistance:
    a0, a1 = sublevel_persistence(g1, kernels)
    b0, b1 = sublevel_persistence(g2, kernels)
    cap = max(float(g1.values.max()), float(g2.values.max()))
    return TopoDistance(wasserstein(a0, b0, 1, cap), wasserstein(a1, b1, 1, cap))


def topo_distance(g1: GridSignal, g2: GridSignal) -> float:
    """W1 over H0 plus W1 over H1; essential deaths truncated at the common maximum."""
    return topo_distances(g1, g2).total


# -- diagram CSV -----------------------------------------------------------

def write_diagrams(diagrams) -> str:
    buf = io.StringIO()
    buf.write("dim,birth,death\n")
    for d in diagrams:
        for q in d.points:
            death = "inf" if q.essential else repr(float(q.death))
            buf.write(f"{d.dimension},{float(q.birth)!r},{death}\n")
    return buf.getvalue()


def read_diagrams(text: str) -> dict[int, PersistenceDiagram]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ["dim", "birth", "death"]:
        raise ValueError(f"expected header dim,birth,death, got {reader.fieldnames}")
    pts: dict[int, list[PersistencePoint]] = {0: [], 1: []}
    for row in reader:
        pts.setdefault(int(row["dim"]), []).append(PersistencePoint(float(row["birth"]), float(row["death"])))
    return {dim: PersistenceDiagram(dim, tuple(p)) for dim, p in pts.items()}
