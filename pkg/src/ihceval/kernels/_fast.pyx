# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled raster kernels: morphology, exact EDT, component labelling.

Must stay bit-identical to the pure-NumPy lane in ``_pure.py``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

cdef double INF = float("inf")


def binary_dilate(mask, se, anchor):
    cdef cnp.uint8_t[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] s = np.ascontiguousarray(se, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef Py_ssize_t sh = s.shape[0], sw = s.shape[1]
    cdef Py_ssize_t ar = anchor[0], ac = anchor[1]
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, i, j, rr, cc
    cdef bint hit
    for r in range(h):
        for c in range(w):
            hit = 0
            for i in range(sh):
                if hit:
                    break
                rr = r - (i - ar)
                if rr < 0 or rr >= h:
                    continue
                for j in range(sw):
                    if not s[i, j]:
                        continue
                    cc = c - (j - ac)
                    if 0 <= cc < w and m[rr, cc]:
                        hit = 1
                        break
            out[r, c] = hit
    return out_arr.astype(bool)


def binary_erode(mask, se, anchor):
    cdef cnp.uint8_t[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] s = np.ascontiguousarray(se, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef Py_ssize_t sh = s.shape[0], sw = s.shape[1]
    cdef Py_ssize_t ar = anchor[0], ac = anchor[1]
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, i, j, rr, cc
    cdef bint keep
    for r in range(h):
        for c in range(w):
            keep = 1
            for i in range(sh):
                if not keep:
                    break
                for j in range(sw):
                    if not s[i, j]:
                        continue
                    rr = r + (i - ar)
                    cc = c + (j - ac)
                    if rr < 0 or rr >= h or cc < 0 or cc >= w or not m[rr, cc]:
                        keep = 0
                        break
            out[r, c] = keep
    return out_arr.astype(bool)


cdef void _edt_1d(double* f, double* d, Py_ssize_t* v, double* z,
                  Py_ssize_t n) nogil:
    cdef Py_ssize_t q, k = -1
    cdef double s
    for q in range(n):
        d[q] = INF
    for q in range(n):
        if f[q] == INF:
            continue
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -INF
            z[1] = INF
            continue
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = INF
    if k < 0:
        return
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = (q - v[k]) * (q - v[k]) + f[v[k]]


def squared_edt(mask):
    cdef cnp.uint8_t[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    f_arr = np.where(np.asarray(m, dtype=bool), 0.0, INF)
    cdef cnp.float64_t[:, ::1] f = np.ascontiguousarray(f_arr)
    cdef Py_ssize_t n = h if h > w else w
    buf_arr = np.empty(n, dtype=np.float64)
    d_arr = np.empty(n, dtype=np.float64)
    v_arr = np.empty(n, dtype=np.intp)
    z_arr = np.empty(n + 1, dtype=np.float64)
    cdef cnp.float64_t[::1] buf = buf_arr
    cdef cnp.float64_t[::1] d = d_arr
    cdef Py_ssize_t[::1] v = v_arr
    cdef cnp.float64_t[::1] z = z_arr
    cdef Py_ssize_t r, c
    for r in range(h):
        _edt_1d(&f[r, 0], &d[0], &v[0], &z[0], w)
        for c in range(w):
            f[r, c] = d[c]
    for c in range(w):
        for r in range(h):
            buf[r] = f[r, c]
        _edt_1d(&buf[0], &d[0], &v[0], &z[0], h)
        for r in range(h):
            f[r, c] = d[r]
    return np.asarray(f)


def label_components(mask):
    cdef cnp.uint8_t[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] labels = labels_arr
    stack_arr = np.empty(h * w, dtype=np.intp)
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t r0, c0, r, c, rr, cc, top
    cdef int dr, dc
    cdef cnp.int32_t count = 0
    for r0 in range(h):
        for c0 in range(w):
            if not m[r0, c0] or labels[r0, c0]:
                continue
            count += 1
            top = 0
            stack[0] = r0 * w + c0
            labels[r0, c0] = count
            while top >= 0:
                r = stack[top] // w
                c = stack[top] % w
                top -= 1
                for dr in range(-1, 2):
                    for dc in range(-1, 2):
                        rr = r + dr
                        cc = c + dc
                        if 0 <= rr < h and 0 <= cc < w \
                                and m[rr, cc] and not labels[rr, cc]:
                            labels[rr, cc] = count
                            top += 1
                            stack[top] = rr * w + cc
    return labels_arr, int(count)
