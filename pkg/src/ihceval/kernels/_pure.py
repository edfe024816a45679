"""Pure-NumPy implementations of the hot raster kernels.

Semantics reference for the compiled lane in ``_fast.pyx``: both lanes must
produce bit-identical outputs. Pixels outside the image are treated as
background everywhere.
"""

from collections import deque

import numpy as np

BACKEND = "pure"

_INF = np.inf


def _shift(mask, dr, dc):
    """Return mask translated by (dr, dc), padding with False."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    r0, r1 = max(dr, 0), h + min(dr, 0)
    c0, c1 = max(dc, 0), w + min(dc, 0)
    if r0 < r1 and c0 < c1:
        out[r0:r1, c0:c1] = mask[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
    return out


def _se_offsets(se, anchor):
    ar, ac = anchor
    rows, cols = np.nonzero(se)
    return [(int(r) - ar, int(c) - ac) for r, c in zip(rows, cols)]


def binary_dilate(mask, se, anchor):
    """One Minkowski dilation of a boolean mask by the structuring element."""
    out = np.zeros_like(mask)
    for dr, dc in _se_offsets(se, anchor):
        out |= _shift(mask, dr, dc)
    return out


def binary_erode(mask, se, anchor):
    """One erosion; the footprint must fit entirely inside the mask."""
    out = np.ones_like(mask)
    for dr, dc in _se_offsets(se, anchor):
        out &= _shift(mask, -dr, -dc)
    return out


def _edt_1d(f):
    """Exact 1-D squared distance transform (lower envelope of parabolas).

    Entries equal to +inf (no source in that lane yet) contribute no
    parabola; an all-inf input stays all-inf.
    """
    n = len(f)
    d = np.full(n, _INF)
    v = np.empty(n, dtype=np.intp)
    z = np.empty(n + 1)
    k = -1
    for q in range(n):
        if f[q] == _INF:
            continue
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -_INF
            z[1] = _INF
            continue
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = _INF
    if k < 0:
        return d
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = (q - v[k]) ** 2 + f[v[k]]
    return d


def squared_edt(mask):
    """Exact squared Euclidean distance to the nearest True pixel.

    Background-free images get all-zero output; an all-False mask returns
    +inf everywhere.
    """
    h, w = mask.shape
    f = np.where(mask, 0.0, _INF)
    for r in range(h):
        f[r, :] = _edt_1d(f[r, :])
    for c in range(w):
        f[:, c] = _edt_1d(f[:, c])
    return f


def label_components(mask):
    """8-connected component labelling.

    Returns (labels, count) where labels is int32, 0 = background, and
    component ids are assigned in raster-scan order of first encounter.
    """
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    count = 0
    for r0 in range(h):
        for c0 in range(w):
            if not mask[r0, c0] or labels[r0, c0]:
                continue
            count += 1
            queue = deque([(r0, c0)])
            labels[r0, c0] = count
            while queue:
                r, c = queue.popleft()
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        rr, cc = r + dr, c + dc
                        if 0 <= rr < h and 0 <= cc < w \
                                and mask[rr, cc] and not labels[rr, cc]:
                            labels[rr, cc] = count
                            queue.append((rr, cc))
    return labels, count
