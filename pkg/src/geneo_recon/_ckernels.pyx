# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same accumulation order as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdint cimport int64_t, int32_t

cnp.import_array()


def hit_counts(const int64_t[::1] xs, const int64_t[::1] ys,
               const int32_t[::1] odx, const int32_t[::1] ody,
               Py_ssize_t width, Py_ssize_t height):
    out = np.zeros((height, width), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef Py_ssize_t k, j, qx, qy
    cdef Py_ssize_t nk = odx.shape[0], ns = xs.shape[0]
    with nogil:
        for k in range(nk):
            for j in range(ns):
                qx = xs[j] - odx[k]
                qy = ys[j] - ody[k]
                if 0 <= qx < width and 0 <= qy < height:
                    o[qy, qx] += 1
    return out


def mismatch_sums(const int64_t[::1] xs, const int64_t[::1] ys, const double[::1] vals,
                  const int32_t[::1] odx, const int32_t[::1] ody, const double[:, ::1] h,
                  Py_ssize_t width, Py_ssize_t height):
    cdef Py_ssize_t n = h.shape[0]
    out = np.zeros((n, height, width), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t i, k, j, qx, qy
    cdef Py_ssize_t nk = odx.shape[0], ns = xs.shape[0]
    cdef double hk
    with nogil:
        for i in range(n):
            for k in range(nk):
                hk = h[i, k]
                for j in range(ns):
                    qx = xs[j] - odx[k]
                    qy = ys[j] - ody[k]
                    if 0 <= qx < width and 0 <= qy < height:
                        o[i, qy, qx] += fabs(vals[j] - hk)
    return out


def argmax_update(double[:, ::1] best_c, int64_t[:, ::1] best_i,
                  const double[:, :, ::1] fields, int64_t base_index):
    cdef Py_ssize_t n = fields.shape[0], H = fields.shape[1], W = fields.shape[2]
    cdef Py_ssize_t j, y, x
    cdef double v
    with nogil:
        for j in range(n):
            for y in range(H):
                for x in range(W):
                    v = fields[j, y, x]
                    if v > best_c[y, x]:
                        best_c[y, x] = v
                        best_i[y, x] = base_index + j


def disk_argmax(const double[:, ::1] best_c, const int64_t[:, ::1] best_i,
                const int32_t[::1] odx, const int32_t[::1] ody):
    cdef Py_ssize_t H = best_c.shape[0], W = best_c.shape[1]
    ax = np.zeros((H, W), dtype=np.int64)
    ay = np.zeros((H, W), dtype=np.int64)
    cdef int64_t[:, ::1] oax = ax
    cdef int64_t[:, ::1] oay = ay
    cdef Py_ssize_t y, x, k, qx, qy, nk = odx.shape[0]
    cdef double wc, cc
    cdef int64_t wi, wq, ci, cq
    with nogil:
        for y in range(H):
            for x in range(W):
                wc = -1e300
                wi = 0x7FFFFFFFFFFFFFFF
                wq = 0x7FFFFFFFFFFFFFFF
                for k in range(nk):
                    qx = x + odx[k]
                    qy = y + ody[k]
                    if qx < 0 or qx >= W or qy < 0 or qy >= H:
                        continue
                    cc = best_c[qy, qx]
                    ci = best_i[qy, qx]
                    cq = qy * W + qx
                    if cc > wc or (cc == wc and (ci < wi or (ci == wi and cq < wq))):
                        wc = cc
                        wi = ci
                        wq = cq
                oax[y, x] = wq % W
                oay[y, x] = wq // W
    return ax, ay


cdef inline Py_ssize_t _find(int64_t[::1] parent, Py_ssize_t a) noexcept nogil:
    cdef Py_ssize_t root = a, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


def h0_pairs(const int64_t[::1] order, Py_ssize_t width, Py_ssize_t height):
    cdef Py_ssize_t n = width * height
    cdef Py_ssize_t pos, v, u, ru, rv, y, x, t, npairs = 0
    rank_a = np.empty(n, dtype=np.int64)
    parent_a = np.arange(n, dtype=np.int64)
    present_a = np.zeros(n, dtype=np.uint8)
    pairs_a = np.empty((max(n - 1, 0), 2), dtype=np.int64)
    cdef int64_t[::1] rank = rank_a
    cdef int64_t[::1] parent = parent_a
    cdef unsigned char[::1] present = present_a
    cdef int64_t[:, ::1] pairs = pairs_a
    cdef Py_ssize_t nb[4]
    with nogil:
        for pos in range(n):
            rank[order[pos]] = pos
        for pos in range(n):
            v = order[pos]
            present[v] = 1
            y = v // width
            x = v - y * width
            nb[0] = v - width if y > 0 else -1
            nb[1] = v + width if y < height - 1 else -1
            nb[2] = v - 1 if x > 0 else -1
            nb[3] = v + 1 if x < width - 1 else -1
            for t in range(4):
                u = nb[t]
                if u < 0 or not present[u]:
                    continue
                ru = _find(parent, u)
                rv = _find(parent, v)
                if ru == rv:
                    continue
                if rank[ru] < rank[rv]:
                    ru, rv = rv, ru
                pairs[npairs, 0] = ru
                pairs[npairs, 1] = v
                npairs += 1
                parent[ru] = rv
    return [(int(a), int(b)) for a, b in pairs_a[:npairs]], int(order[0])


def h1_pairs(const int64_t[::1] order, Py_ssize_t width, Py_ssize_t height):
    cdef Py_ssize_t n = width * height
    cdef Py_ssize_t outside = n
    cdef Py_ssize_t pos, v, u, ru, rv, y, x, yy, xx, ddx, ddy, t, nn, npairs = 0
    rank_a = np.empty(n + 1, dtype=np.int64)
    parent_a = np.arange(n + 1, dtype=np.int64)
    present_a = np.zeros(n, dtype=np.uint8)
    pairs_a = np.empty((9 * n + 1, 2), dtype=np.int64)
    cdef int64_t[::1] rank = rank_a
    cdef int64_t[::1] parent = parent_a
    cdef unsigned char[::1] present = present_a
    cdef int64_t[:, ::1] pairs = pairs_a
    cdef Py_ssize_t nb[9]
    with nogil:
        for pos in range(n):
            rank[order[pos]] = pos
        rank[outside] = n
        for pos in range(n - 1, -1, -1):
            v = order[pos]
            present[v] = 1
            y = v // width
            x = v - y * width
            nn = 0
            if x == 0 or y == 0 or x == width - 1 or y == height - 1:
                nb[nn] = outside
                nn += 1
            for ddy in range(-1, 2):
                yy = y + ddy
                if yy < 0 or yy >= height:
                    continue
                for ddx in range(-1, 2):
                    xx = x + ddx
                    if (ddx != 0 or ddy != 0) and 0 <= xx < width and present[yy * width + xx]:
                        nb[nn] = yy * width + xx
                        nn += 1
            for t in range(nn):
                u = nb[t]
                ru = _find(parent, u)
                rv = _find(parent, v)
                if ru == rv:
                    continue
                if rank[ru] > rank[rv]:
                    ru, rv = rv, ru
                pairs[npairs, 0] = v
                pairs[npairs, 1] = ru
                npairs += 1
                parent[ru] = rv
    return [(int(a), int(b)) for a, b in pairs_a[:npairs]]
