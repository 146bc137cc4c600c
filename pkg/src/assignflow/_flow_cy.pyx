# Compiled flow kernels. Same contracts as _flow_py: each function fills
# rows [r0, r1) of out from full input arrays; per-pixel reductions run
# left-to-right (window offsets row-major) so threaded row partitions
# reproduce the serial result bit for bit.

from libc.math cimport exp, log

import numpy as np


def lift_rows(double[:, ::1] base, double[:, ::1] negu, double[:, ::1] out,
              Py_ssize_t r0, Py_ssize_t r1):
    cdef Py_ssize_t n = base.shape[1]
    cdef Py_ssize_t i, j
    cdef double mx, z, e
    with nogil:
        for i in range(r0, r1):
            mx = negu[i, 0]
            for j in range(1, n):
                if negu[i, j] > mx:
                    mx = negu[i, j]
            z = 0.0
            for j in range(n):
                e = base[i, j] * exp(negu[i, j] - mx)
                out[i, j] = e
                z += e
            for j in range(n):
                out[i, j] /= z


def softmax_rows(double[:, ::1] m, double[:, ::1] out,
                 Py_ssize_t r0, Py_ssize_t r1):
    cdef Py_ssize_t n = m.shape[1]
    cdef Py_ssize_t i, j
    cdef double mx, z, e
    with nogil:
        for i in range(r0, r1):
            mx = m[i, 0]
            for j in range(1, n):
                if m[i, j] > mx:
                    mx = m[i, j]
            z = 0.0
            for j in range(n):
                e = exp(m[i, j] - mx)
                out[i, j] = e
                z += e
            for j in range(n):
                out[i, j] /= z


def window_log_mean(double[:, ::1] logl, Py_ssize_t height, Py_ssize_t width,
                    Py_ssize_t radius, double[:, ::1] out,
                    Py_ssize_t gr0, Py_ssize_t gr1):
    cdef Py_ssize_t n = logl.shape[1]
    cdef Py_ssize_t gy, gx, y0, y1, x0, x1, yy, xx, j, pix, row
    cdef double cnt
    with nogil:
        for gy in range(gr0, gr1):
            y0 = gy - radius if gy - radius > 0 else 0
            y1 = gy + radius if gy + radius < height - 1 else height - 1
            for gx in range(width):
                x0 = gx - radius if gx - radius > 0 else 0
                x1 = gx + radius if gx + radius < width - 1 else width - 1
                pix = gy * width + gx
                for j in range(n):
                    out[pix, j] = 0.0
                for yy in range(y0, y1 + 1):
                    for xx in range(x0, x1 + 1):
                        row = yy * width + xx
                        for j in range(n):
                            out[pix, j] += logl[row, j]
                cnt = <double>((y1 - y0 + 1) * (x1 - x0 + 1))
                for j in range(n):
                    out[pix, j] /= cnt


def replicator_rows(double[:, ::1] w, double[:, ::1] s, double eps,
                    double[:, ::1] out, Py_ssize_t r0, Py_ssize_t r1):
    cdef Py_ssize_t n = w.shape[1]
    cdef Py_ssize_t i, j
    cdef double z, t, mn
    with nogil:
        for i in range(r0, r1):
            z = 0.0
            for j in range(n):
                out[i, j] = w[i, j] * s[i, j]
                z += out[i, j]
            for j in range(n):
                out[i, j] /= z
            t = 0.0
            for j in range(n):
                t += out[i, j]
            for j in range(n):
                out[i, j] /= t
            if eps > 0.0:
                mn = out[i, 0]
                for j in range(1, n):
                    if out[i, j] < mn:
                        mn = out[i, j]
                if mn < eps:
                    t = 0.0
                    for j in range(n):
                        out[i, j] = out[i, j] - mn + eps
                        t += out[i, j]
                    for j in range(n):
                        out[i, j] /= t


def floor_rows(double[:, ::1] w, double eps, double[:, ::1] out,
               Py_ssize_t r0, Py_ssize_t r1):
    cdef Py_ssize_t n = w.shape[1]
    cdef Py_ssize_t i, j
    cdef double t, mn
    with nogil:
        for i in range(r0, r1):
            mn = w[i, 0]
            for j in range(1, n):
                if w[i, j] < mn:
                    mn = w[i, j]
            if mn < eps:
                t = 0.0
                for j in range(n):
                    out[i, j] = w[i, j] - mn + eps
                    t += out[i, j]
                for j in range(n):
                    out[i, j] /= t
            else:
                for j in range(n):
                    out[i, j] = w[i, j]
