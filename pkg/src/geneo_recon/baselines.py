"""Reference reconstructors and the MSE metric."""

import numpy as np
from scipy.spatial import cKDTree

from .grid import GridSignal, SparseSampling


def knn1_reconstruct(s: SparseSampling) -> GridSignal:
    """Copy the value of the nearest sample (Euclidean) into every pixel.

    Equidistant samples resolve to the row-major-first one.  Distances are
    compared as exact integer squares.
    """
    if len(s) == 0:
        raise ValueError("1-NN needs at least one sample")
    order = np.lexsort((s.xs, s.ys))  # row-major
    sx, sy, sv = s.xs[order], s.ys[order], s.values[order]
    tree = cKDTree(np.column_stack([sx, sy]).astype(float))
    ys, xs = np.mgrid[0 : s.height, 0 : s.width]
    px, py = xs.ravel(), ys.ravel()
    pts = np.column_stack([px, py]).astype(float)
    k = min(8, len(s))
    while True:
        _, idx = tree.query(pts, k=k)
        idx = idx.reshape(len(pts), k)
        d2 = (sx[idx] - px[:, None]) ** 2 + (sy[idx] - py[:, None]) ** 2
        best = d2.min(axis=1)
        # if every returned neighbour ties, more may lie at the same distance
        if k == len(s) or (d2[:, -1] > best).all():
            break
        k = min(2 * k, len(s))
    # smallest row-major rank among the tied nearest samples
    rank = np.where(d2 == best[:, None], idx, len(s))
    winner = rank.min(axis=1)
    return GridSignal(sv[winner].reshape(s.height, s.width))


def mse(a: GridSignal, b: GridSignal) -> float:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a.values - b.values
    return float(np.mean(diff * diff))
