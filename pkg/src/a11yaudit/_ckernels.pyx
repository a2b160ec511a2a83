# cython: language_level=3
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def two_means(px_in, double[::1] lin, int max_iter=20):
    cdef const unsigned char[:, ::1] px = np.ascontiguousarray(px_in, dtype=np.uint8)
    cdef Py_ssize_t n = px.shape[0]
    cdef Py_ssize_t i, lo_i = 0, hi_i = 0
    cdef double lum, lo_l, hi_l, d0, d1, dr, dg, db
    cdef double c0r, c0g, c0b, c1r, c1g, c1b
    cdef long long s0r, s0g, s0b, s1r, s1g, s1b, tr = 0, tg = 0, tb = 0
    cdef long long dist, best
    cdef Py_ssize_t n0 = 0, n1 = 0
    cdef int it, changed, first = 1
    cdef unsigned char[::1] labels = np.zeros(n, dtype=np.uint8)
    cdef unsigned char lab

    lo_l = hi_l = 0.2126 * lin[px[0, 0]] + 0.7152 * lin[px[0, 1]] + 0.0722 * lin[px[0, 2]]
    for i in range(1, n):
        lum = 0.2126 * lin[px[i, 0]] + 0.7152 * lin[px[i, 1]] + 0.0722 * lin[px[i, 2]]
        if lum < lo_l or (lum == lo_l and _rgb_less(px, i, lo_i)):
            lo_l = lum
            lo_i = i
        if lum > hi_l or (lum == hi_l and _rgb_less(px, hi_i, i)):
            hi_l = lum
            hi_i = i
    if px[lo_i, 0] == px[hi_i, 0] and px[lo_i, 1] == px[hi_i, 1] and px[lo_i, 2] == px[hi_i, 2]:
        best = -1
        for i in range(n):
            dist = ((<long long>px[i, 0] - px[lo_i, 0]) ** 2
                    + (<long long>px[i, 1] - px[lo_i, 1]) ** 2
                    + (<long long>px[i, 2] - px[lo_i, 2]) ** 2)
            if dist > best or (dist == best and _rgb_less(px, hi_i, i)):
                best = dist
                hi_i = i

    c0r = px[lo_i, 0]; c0g = px[lo_i, 1]; c0b = px[lo_i, 2]
    c1r = px[hi_i, 0]; c1g = px[hi_i, 1]; c1b = px[hi_i, 2]
    for i in range(n):
        tr += px[i, 0]; tg += px[i, 1]; tb += px[i, 2]
    s0r = s0g = s0b = s1r = s1g = s1b = 0

    for it in range(max_iter):
        changed = 0
        s1r = s1g = s1b = 0
        n1 = 0
        for i in range(n):
            dr = px[i, 0] - c0r; dg = px[i, 1] - c0g; db = px[i, 2] - c0b
            d0 = dr * dr + dg * dg + db * db
            dr = px[i, 0] - c1r; dg = px[i, 1] - c1g; db = px[i, 2] - c1b
            d1 = dr * dr + dg * dg + db * db
            lab = 1 if d1 < d0 else 0
            if lab != labels[i]:
                changed = 1
            labels[i] = lab
            if lab:
                s1r += px[i, 0]; s1g += px[i, 1]; s1b += px[i, 2]
                n1 += 1
        if not first and not changed:
            break
        first = 0
        n0 = n - n1
        s0r = tr - s1r; s0g = tg - s1g; s0b = tb - s1b
        if n0:
            c0r = <double>s0r / n0; c0g = <double>s0g / n0; c0b = <double>s0b / n0
        if n1:
            c1r = <double>s1r / n1; c1g = <double>s1g / n1; c1b = <double>s1b / n1
    return (s0r, s0g, s0b), n0, (s1r, s1g, s1b), n1


cdef inline bint _rgb_less(const unsigned char[:, ::1] px, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    if px[a, 0] != px[b, 0]:
        return px[a, 0] < px[b, 0]
    if px[a, 1] != px[b, 1]:
        return px[a, 1] < px[b, 1]
    return px[a, 2] < px[b, 2]


def overlap_pairs(boxes_in, pre_in, end_in, long long num, long long den):
    cdef const long long[:, ::1] boxes = np.ascontiguousarray(boxes_in, dtype=np.int64).reshape(-1, 4)
    cdef const long long[::1] pre = np.ascontiguousarray(pre_in, dtype=np.int64)
    cdef const long long[::1] end = np.ascontiguousarray(end_in, dtype=np.int64)
    cdef Py_ssize_t m = boxes.shape[0]
    cdef Py_ssize_t i, j
    cdef long long ai, aj, small, w, h
    cdef list out = []
    for i in range(m):
        ai = (boxes[i, 2] - boxes[i, 0]) * (boxes[i, 3] - boxes[i, 1])
        for j in range(i + 1, m):
            if (pre[i] <= pre[j] and pre[j] <= end[i]) or (pre[j] <= pre[i] and pre[i] <= end[j]):
                continue
            aj = (boxes[j, 2] - boxes[j, 0]) * (boxes[j, 3] - boxes[j, 1])
            small = ai if ai < aj else aj
            if small == 0:
                continue
            w = min(boxes[i, 2], boxes[j, 2]) - max(boxes[i, 0], boxes[j, 0])
            h = min(boxes[i, 3], boxes[j, 3]) - max(boxes[i, 1], boxes[j, 1])
            if w <= 0 or h <= 0:
                continue
            if w * h * den >= num * small:
                out.append((i, j))
    return out
