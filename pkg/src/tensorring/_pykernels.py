"""Pure-NumPy convolution kernels.

Fallback twin of the compiled module ``tensorring._kernels``: same functions,
same contracts.  Inputs are already zero-padded, C-contiguous float64 arrays;
each function performs exactly ``prod(output shape) * (taps * contracted rank)``
multiply-accumulates, padded positions included.
"""

import numpy as np

BACKEND = "python"


def conv2d(xpad: np.ndarray, w: np.ndarray, stride: int, out_h: int, out_w: int) -> np.ndarray:
    """Direct 2D cross-correlation: (Hp, Wp, C) x (T, C, D1, D2) -> (out_h, out_w, T)."""
    kh, kw = w.shape[2], w.shape[3]
    y = np.zeros((out_h, out_w, w.shape[0]))
    for d1 in range(kh):
        for d2 in range(kw):
            xs = xpad[
                d1 : d1 + stride * (out_h - 1) + 1 : stride,
                d2 : d2 + stride * (out_w - 1) + 1 : stride,
                :,
            ]
            y += np.tensordot(xs, w[:, :, d1, d2], axes=([2], [1]))
    return y


def conv1d_axis0(zpad: np.ndarray, core: np.ndarray, stride: int, out_len: int) -> np.ndarray:
    """1D convolution along axis 0: (Lp, M, A, B) x (B, D, E) -> (out_len, M, A, E)."""
    taps = core.shape[1]
    out = np.zeros((out_len, zpad.shape[1], zpad.shape[2], core.shape[2]))
    for d in range(taps):
        zs = zpad[d : d + stride * (out_len - 1) + 1 : stride]
        out += np.tensordot(zs, core[:, d, :], axes=([3], [0]))
    return out


def conv1d_axis1(zpad: np.ndarray, core: np.ndarray, stride: int, out_len: int) -> np.ndarray:
    """1D convolution along axis 1: (M, Lp, A, B) x (B, D, E) -> (M, out_len, A, E)."""
    taps = core.shape[1]
    out = np.zeros((zpad.shape[0], out_len, zpad.shape[2], core.shape[2]))
    for d in range(taps):
        zs = zpad[:, d : d + stride * (out_len - 1) + 1 : stride]
        out += np.tensordot(zs, core[:, d, :], axes=([3], [0]))
    return out
