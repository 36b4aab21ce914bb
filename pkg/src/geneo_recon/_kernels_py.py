"""Numpy/pure-Python kernels; the reference the compiled core must reproduce bit for bit.

Disk sums accumulate offset-major: every anchor receives its contributions
in ascending disk-offset order, whatever the sample order.  The compiled
kernels follow the same order so both backends give identical floats.
"""

import numpy as np


def _shifted(xs, ys, dx, dy, width, height):
    qx = xs - dx
    qy = ys - dy
    ok = (qx >= 0) & (qx < width) & (qy >= 0) & (qy < height)
    return qx[ok], qy[ok], ok


def hit_counts(xs, ys, odx, ody, width, height):
    out = np.zeros((height, width), dtype=np.int64)
    for dx, dy in zip(odx.tolist(), ody.tolist()):
        qx, qy, _ = _shifted(xs, ys, dx, dy, width, height)
        out[qy, qx] += 1
    return out


def mismatch_sums(xs, ys, vals, odx, ody, h, width, height):
    """Sum of ``|v - h_i(xi)|`` over samples at ``q + xi``, for each pattern ``i``."""
    n = h.shape[0]
    out = np.zeros((n, height, width))
    for k, (dx, dy) in enumerate(zip(odx.tolist(), ody.tolist())):
        qx, qy, ok = _shifted(xs, ys, dx, dy, width, height)
        if len(qx):
            out[:, qy, qx] += np.abs(vals[ok][None, :] - h[:, k][:, None])
    return out


def argmax_update(best_c, best_i, fields, base_index):
    """Fold ``fields`` (patterns ``base_index...``) into the running per-anchor max."""
    for j in range(fields.shape[0]):
        better = fields[j] > best_c
        best_c[better] = fields[j][better]
        best_i[better] = base_index + j


def disk_argmax(best_c, best_i, odx, ody):
    """For each pixel, the anchor within the disk with the best key.

    Key order: larger confidence, then smaller pattern index, then smaller
    row-major anchor index.
    """
    height, width = best_c.shape
    win_c = np.full((height, width), -np.inf)
    win_i = np.full((height, width), np.iinfo(np.int64).max, dtype=np.int64)
    win_q = np.full((height, width), np.iinfo(np.int64).max, dtype=np.int64)
    ys, xs = np.mgrid[0:height, 0:width]
    for dx, dy in zip(odx.tolist(), ody.tolist()):
        # pixel p considers anchor q = p + (dx, dy)
        y0, y1 = max(0, -dy), min(height, height - dy)
        x0, x1 = max(0, -dx), min(width, width - dx)
        if y0 >= y1 or x0 >= x1:
            continue
        cc = best_c[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
        ci = best_i[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
        cq = (ys[y0:y1, x0:x1] + dy) * width + (xs[y0:y1, x0:x1] + dx)
        wc = win_c[y0:y1, x0:x1]
        wi = win_i[y0:y1, x0:x1]
        wq = win_q[y0:y1, x0:x1]
        better = (cc > wc) | ((cc == wc) & ((ci < wi) | ((ci == wi) & (cq < wq))))
        wc[better] = cc[better]
        wi[better] = ci[better]
        wq[better] = cq[better]
    anchor_y, anchor_x = np.divmod(win_q, width)
    return anchor_x, anchor_y


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root


def h0_pairs(order, width, height):
    """Elder-rule merges of 4-connected sublevel components.

    ``order`` lists vertex indices by increasing filtration.  Returns
    ``(pairs, root)`` where each pair is ``(birth_vertex, death_vertex)`` and
    ``root`` is the birth vertex of the surviving component.
    """
    n = width * height
    rank = [0] * n
    for pos, v in enumerate(order):
        rank[v] = pos
    uf = _UnionFind(n)
    present = [False] * n
    pairs = []
    for v in order:
        v = int(v)
        present[v] = True
        y, x = divmod(v, width)
        for u in (v - width if y > 0 else -1, v + width if y < height - 1 else -1,
                  v - 1 if x > 0 else -1, v + 1 if x < width - 1 else -1):
            if u < 0 or not present[u]:
                continue
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                continue
            # roots are the oldest vertex of their component
            if rank[ru] < rank[rv]:
                ru, rv = rv, ru
            pairs.append((ru, v))
            uf.parent[ru] = rv
    return pairs, int(order[0])


def h1_pairs(order, width, height):
    """Hole pairs via the 8-connected complement grown in reverse order.

    Returns ``(birth_vertex, death_vertex)`` pairs: the hole is created when
    ``birth_vertex`` enters the sublevel set and filled by ``death_vertex``.
    """
    n = width * height
    outside = n
    rank = [0] * (n + 1)
    for pos, v in enumerate(order):
        rank[v] = pos
    rank[outside] = n
    uf = _UnionFind(n + 1)
    present = [False] * n
    pairs = []
    for v in reversed(order):
        v = int(v)
        present[v] = True
        y, x = divmod(v, width)
        nbrs = []
        if x == 0 or y == 0 or x == width - 1 or y == height - 1:
            nbrs.append(outside)
        for ddy in (-1, 0, 1):
            yy = y + ddy
            if yy < 0 or yy >= height:
                continue
            for ddx in (-1, 0, 1):
                xx = x + ddx
                if (ddx or ddy) and 0 <= xx < width and present[yy * width + xx]:
                    nbrs.append(yy * width + xx)
        for u in nbrs:
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                continue
            # in reverse time the elder component has the larger rank
            if rank[ru] > rank[rv]:
                ru, rv = rv, ru
            pairs.append((v, ru))
            uf.parent[ru] = rv
    return pairs
