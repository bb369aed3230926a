"""Deliberately slow reference implementations.

Everything here is written from the definitions with plain loops, so the
library under test and its oracle share no code paths.  Sizes must stay
small; nothing in this module is optimized.
"""

import numpy as np


def naive_tr_reconstruct(cores) -> np.ndarray:
    """Element-by-element ring contraction: each entry is the trace of
    the product of the matching lateral slices."""
    dims = tuple(c.shape[1] for c in cores)
    out = np.zeros(dims)
    for idx in np.ndindex(*dims):
        acc = np.eye(cores[0].shape[0])
        for c, j in zip(cores, idx):
            acc = acc @ c[:, j, :].astype(np.float64)
        out[idx] = np.trace(acc)
    return out


def naive_conv2d(x: np.ndarray, w: np.ndarray, stride: int, padding: int) -> np.ndarray:
    """Quadruple-loop 2D cross-correlation, float accumulation."""
    i1, i2, cin = x.shape
    t, c, d1, d2 = w.shape
    assert c == cin
    xp = np.zeros((i1 + 2 * padding, i2 + 2 * padding, cin))
    xp[padding : padding + i1, padding : padding + i2] = x
    o1 = (i1 + 2 * padding - d1) // stride + 1
    o2 = (i2 + 2 * padding - d2) // stride + 1
    y = np.zeros((o1, o2, t))
    for p1 in range(o1):
        for p2 in range(o2):
            for tt in range(t):
                acc = 0.0
                for cc in range(c):
                    for e1 in range(d1):
                        for e2 in range(d2):
                            acc += float(xp[p1 * stride + e1, p2 * stride + e2, cc]) \
                                * float(w[tt, cc, e1, e2])
                y[p1, p2, tt] = acc
    return y


def naive_conv1d(z: np.ndarray, core: np.ndarray, stride: int, padding: int,
                 axis: int) -> np.ndarray:
    """Loop 1D convolution of (.., L, .., A, B) with a (B, D, E) core
    along ``axis``, contracting the trailing rank mode."""
    b, d, e = core.shape
    pad = [(0, 0)] * z.ndim
    pad[axis] = (padding, padding)
    zp = np.pad(z, pad)
    out_len = (z.shape[axis] + 2 * padding - d) // stride + 1
    shape = list(z.shape)
    shape[axis] = out_len
    shape[-1] = e
    out = np.zeros(shape)
    for idx in np.ndindex(*out.shape):
        pos = idx[axis]
        acc = 0.0
        for tap in range(d):
            src = list(idx)
            src[axis] = pos * stride + tap
            for r in range(b):
                src[-1] = r
                acc += float(zp[tuple(src)]) * float(core[r, tap, idx[-1]])
        out[idx] = acc
    return out


def naive_contract(x: np.ndarray, y: np.ndarray, modes_x, modes_y) -> np.ndarray:
    """Loop multi-mode contraction; free modes of x first, then of y."""
    modes_x = list(modes_x)
    modes_y = list(modes_y)
    free_x = [m for m in range(x.ndim) if m not in modes_x]
    free_y = [m for m in range(y.ndim) if m not in modes_y]
    shared = [x.shape[m] for m in modes_x]
    out = np.zeros([x.shape[m] for m in free_x] + [y.shape[m] for m in free_y])
    for idx in np.ndindex(*out.shape):
        acc = 0.0
        for k in np.ndindex(*shared):
            xi = [0] * x.ndim
            yi = [0] * y.ndim
            for m, v in zip(free_x, idx[: len(free_x)]):
                xi[m] = v
            for m, v in zip(free_y, idx[len(free_x) :]):
                yi[m] = v
            for mx, my, v in zip(modes_x, modes_y, k):
                xi[mx] = v
                yi[my] = v
            acc += float(x[tuple(xi)]) * float(y[tuple(yi)])
        out[idx] = acc
    return out


def tail_rank(singular_values, delta: float) -> int:
    """Smallest kept rank whose discarded tail energy is <= delta^2."""
    s = list(float(v) for v in singular_values)
    for r in range(1, len(s) + 1):
        if sum(v * v for v in s[r:]) <= delta * delta:
            return r
    return len(s)


def slow_divisors(n: int) -> list:
    return [d for d in range(1, n + 1) if n % d == 0]


def brute_force_search(w, eps: float):
    """Re-enumerate every (rotation, boundary-rank) candidate one public
    call at a time and minimize (storage, shift, first_rank) directly."""
    from tensorring import tr_svd

    best = None
    table = {}
    for shift in range(4):
        probe = tr_svd(w, eps, shift=shift, first_rank=1)
        truncated = probe.ranks[0] * probe.ranks[1]
        for r1 in slow_divisors(truncated):
            cand = tr_svd(w, eps, shift=shift, first_rank=r1)
            storage = sum(int(np.prod(c.shape)) for c in cand.cores)
            table[(shift, r1)] = storage
            key = (storage, shift, r1)
            if best is None or key < best:
                best = key
    return best, table
