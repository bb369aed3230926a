# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernels (hot inner loops of the package).

Contracts are identical to ``tensorring._pykernels``; see that module for the
reference semantics.  All arrays are C-contiguous float64 and already padded.
"""

import numpy as np

BACKEND = "cython"


def conv2d(const double[:, :, ::1] xpad, const double[:, :, :, ::1] w,
           Py_ssize_t stride, Py_ssize_t out_h, Py_ssize_t out_w):
    """Direct 2D cross-correlation: (Hp, Wp, C) x (T, C, D1, D2) -> (out_h, out_w, T)."""
    cdef Py_ssize_t nt = w.shape[0], nc = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    y = np.zeros((out_h, out_w, nt))
    cdef double[:, :, ::1] yv = y
    cdef Py_ssize_t p, q, t, c, d1, d2
    cdef double acc
    for p in range(out_h):
        for q in range(out_w):
            for t in range(nt):
                acc = 0.0
                for d1 in range(kh):
                    for d2 in range(kw):
                        # innermost over c: unit stride in xpad
                        for c in range(nc):
                            acc += w[t, c, d1, d2] * xpad[p * stride + d1, q * stride + d2, c]
                yv[p, q, t] = acc
    return y


def conv1d_axis0(const double[:, :, :, ::1] zpad, const double[:, :, ::1] core,
                 Py_ssize_t stride, Py_ssize_t out_len):
    """1D convolution along axis 0: (Lp, M, A, B) x (B, D, E) -> (out_len, M, A, E)."""
    cdef Py_ssize_t nm = zpad.shape[1], na = zpad.shape[2], nb = zpad.shape[3]
    cdef Py_ssize_t taps = core.shape[1], ne = core.shape[2]
    out = np.zeros((out_len, nm, na, ne))
    cdef double[:, :, :, ::1] ov = out
    cdef Py_ssize_t p, m, a, e, b, d
    cdef double acc
    for p in range(out_len):
        for m in range(nm):
            for a in range(na):
                for e in range(ne):
                    acc = 0.0
                    for d in range(taps):
                        # innermost over b: unit stride in zpad
                        for b in range(nb):
                            acc += zpad[p * stride + d, m, a, b] * core[b, d, e]
                    ov[p, m, a, e] = acc
    return out


def conv1d_axis1(const double[:, :, :, ::1] zpad, const double[:, :, ::1] core,
                 Py_ssize_t stride, Py_ssize_t out_len):
    """1D convolution along axis 1: (M, Lp, A, B) x (B, D, E) -> (M, out_len, A, E)."""
    cdef Py_ssize_t nm = zpad.shape[0], na = zpad.shape[2], nb = zpad.shape[3]
    cdef Py_ssize_t taps = core.shape[1], ne = core.shape[2]
    out = np.zeros((nm, out_len, na, ne))
    cdef double[:, :, :, ::1] ov = out
    cdef Py_ssize_t p, m, a, e, b, d
    cdef double acc
    for m in range(nm):
        for p in range(out_len):
            for a in range(na):
                for e in range(ne):
                    acc = 0.0
                    for d in range(taps):
                        # innermost over b: unit stride in zpad
                        for b in range(nb):
                            acc += zpad[m, p * stride + d, a, b] * core[b, d, e]
                    ov[m, p, a, e] = acc
    return out
