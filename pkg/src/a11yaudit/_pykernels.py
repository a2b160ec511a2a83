"""Pure-Python/numpy implementations of the hot kernels.

Semantics are identical to ``_ckernels.pyx``; both are checked against each
other in the test suite.
"""
import numpy as np


def _seed_pair(px, lin):
    r = px[:, 0]
    g = px[:, 1]
    b = px[:, 2]
    lum = 0.2126 * lin[r] + 0.7152 * lin[g] + 0.0722 * lin[b]
    order = np.lexsort((b, g, r, lum))
    lo = px[order[0]]
    hi = px[order[-1]]
    if (lo == hi).all():
        d = ((px.astype(np.int64) - lo.astype(np.int64)) ** 2).sum(axis=1)
        far = np.flatnonzero(d == d.max())
        cand = px[far]
        pick = np.lexsort((cand[:, 2], cand[:, 1], cand[:, 0]))[-1]
        hi = cand[pick]
    return lo.astype(np.float64), hi.astype(np.float64)


def two_means(px, lin, max_iter=20):
    """Lloyd 2-means over an (n, 3) uint8 array.

    Returns ``(sum0, n0, sum1, n1)`` where the sums are integer RGB totals of
    each final cluster. Cluster 0 starts at the darkest pixel.
    """
    px = np.ascontiguousarray(px, dtype=np.uint8)
    n = px.shape[0]
    c0, c1 = _seed_pair(px, lin)
    f = px.astype(np.float64)
    wide = px.astype(np.int64)
    labels = None
    s0 = s1 = np.zeros(3, dtype=np.int64)
    n0 = n1 = 0
    for _ in range(max_iter):
        dr = f[:, 0] - c0[0]
        dg = f[:, 1] - c0[1]
        db = f[:, 2] - c0[2]
        d0 = dr * dr + dg * dg + db * db
        dr = f[:, 0] - c1[0]
        dg = f[:, 1] - c1[1]
        db = f[:, 2] - c1[2]
        d1 = dr * dr + dg * dg + db * db
        new = d1 < d0
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        s1 = wide[labels].sum(axis=0)
        n1 = int(labels.sum())
        s0 = wide.sum(axis=0) - s1
        n0 = n - n1
        if n0:
            c0 = s0 / n0
        if n1:
            c1 = s1 / n1
    return (
        tuple(int(v) for v in s0), n0,
        tuple(int(v) for v in s1), n1,
    )


def overlap_pairs(boxes, pre, end, num, den):
    """Index pairs (i, j), i < j, of boxes whose overlap covers at least
    ``num/den`` of the smaller box, skipping ancestor/descendant pairs."""
    out = []
    m = len(boxes)
    boxes = [tuple(int(v) for v in row) for row in boxes]
    pre = [int(v) for v in pre]
    end = [int(v) for v in end]
    areas = [(r - l) * (b - t) for l, t, r, b in boxes]
    for i in range(m):
        li, ti, ri, bi = boxes[i]
        for j in range(i + 1, m):
            if pre[i] <= pre[j] <= end[i] or pre[j] <= pre[i] <= end[j]:
                continue
            small = min(areas[i], areas[j])
            if small == 0:
                continue
            lj, tj, rj, bj = boxes[j]
            w = min(ri, rj) - max(li, lj)
            h = min(bi, bj) - max(ti, tj)
            if w <= 0 or h <= 0:
                continue
            if w * h * den >= num * small:
                out.append((i, j))
    return out
