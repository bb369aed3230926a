"""Dense N-way tensors and the fundamental operations built on them.

Conventions, pinned once for the whole package:

* row-major (C) layout, last index fastest;
* modes are 0-based, ``0 <= mode < ndim``;
* unfolding along a mode puts that mode on the rows and flattens the
  remaining modes in ascending order, row-major;
* the 2D convolution is a cross-correlation (no kernel flip) with stride
  ``s`` and symmetric zero-padding ``p``; the output extent is
  ``floor((I + 2p - D) / s) + 1`` and the kernel must fit the padded
  input at least once;
* accumulation is always binary64, even for binary32 tensors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tensorring import backend
from tensorring.errors import GeometryError, ShapeError

SUPPORTED_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))


@dataclass(frozen=True)
class DenseTensor:
    """Immutable dense real tensor (binary32 or binary64, C-contiguous)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.dtype not in SUPPORTED_DTYPES:
            raise ShapeError(f"unsupported dtype {arr.dtype}; expected float32 or float64")
        if arr.ndim < 1:
            raise ShapeError("tensor order must be at least 1")
        if any(d < 1 for d in arr.shape):
            raise ShapeError(f"every mode size must be >= 1, got {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def astype(self, dtype) -> "DenseTensor":
        dtype = np.dtype(dtype)
        if dtype == self.data.dtype:
            return self
        return DenseTensor(self.data.astype(dtype))

    def norm(self) -> float:
        """Frobenius norm, accumulated in binary64."""
        return float(np.linalg.norm(self.data.astype(np.float64, copy=False)))


def as_tensor(x, dtype=None) -> DenseTensor:
    """Coerce an array-like (or DenseTensor) to a DenseTensor."""
    if isinstance(x, DenseTensor):
        return x if dtype is None else x.astype(dtype)
    arr = np.asarray(x, dtype=np.dtype(dtype) if dtype is not None else None)
    if arr.dtype not in SUPPORTED_DTYPES:
        arr = arr.astype(np.float64)
    return DenseTensor(arr)


@dataclass(frozen=True)
class ConvGeometry:
    """Stride and symmetric zero-padding of a 2D convolution."""

    stride: int = 1
    padding: int = 0

    def __post_init__(self) -> None:
        if self.stride < 1:
            raise GeometryError(f"stride must be >= 1, got {self.stride}")
        if self.padding < 0:
            raise GeometryError(f"padding must be >= 0, got {self.padding}")

    def out_size(self, in_size: int, kernel: int) -> int:
        """Output extent floor((in + 2*padding - kernel)/stride) + 1."""
        span = in_size + 2 * self.padding - kernel
        if span < 0:
            raise GeometryError(
                f"invalid geometry: input {in_size}, kernel {kernel}, "
                f"stride {self.stride}, padding {self.padding}"
            )
        return span // self.stride + 1


def _check_mode(t: DenseTensor, mode: int) -> None:
    if not 0 <= mode < t.order:
        raise ShapeError(f"mode {mode} out of range for order-{t.order} tensor")


def unfold(t: DenseTensor, mode: int) -> np.ndarray:
    """Mode-`mode` unfolding: rows indexed by the mode, columns by the
    remaining modes in ascending order (row-major)."""
    _check_mode(t, mode)
    return np.moveaxis(t.data, mode, 0).reshape(t.dims[mode], -1)


def fold(m: np.ndarray, mode: int, dims) -> DenseTensor:
    """Inverse of :func:`unfold` for the given full dims."""
    dims = tuple(int(d) for d in dims)
    if not 0 <= mode < len(dims):
        raise ShapeError(f"mode {mode} out of range for dims {dims}")
    rest = dims[:mode] + dims[mode + 1 :]
    if m.shape != (dims[mode], int(np.prod(rest, dtype=np.int64))):
        raise ShapeError(f"matrix shape {m.shape} does not match dims {dims} at mode {mode}")
    arr = np.moveaxis(m.reshape((dims[mode],) + rest), 0, mode)
    return DenseTensor(np.ascontiguousarray(arr))


def circular_shift(t: DenseTensor, k: int) -> DenseTensor:
    """Cyclic left rotation of the modes by ``k``: dims become
    (I_{k+1}, ..., I_N, I_1, ..., I_k)."""
    if not 0 <= k < t.order:
        raise ShapeError(f"shift {k} out of range for order-{t.order} tensor")
    if k == 0:
        return t
    axes = tuple(range(k, t.order)) + tuple(range(k))
    return DenseTensor(np.ascontiguousarray(t.data.transpose(axes)))


def contract(x: DenseTensor, y: DenseTensor, mode_x: int, mode_y: int) -> DenseTensor:
    """Single-mode tensor contraction; remaining modes of ``x`` first, then of ``y``."""
    _check_mode(x, mode_x)
    _check_mode(y, mode_y)
    if x.dims[mode_x] != y.dims[mode_y]:
        raise ShapeError(
            f"contracted sizes differ: {x.dims[mode_x]} (mode {mode_x}) vs "
            f"{y.dims[mode_y]} (mode {mode_y})"
        )
    out = np.tensordot(x.data, y.data, axes=([mode_x], [mode_y]))
    return DenseTensor(np.ascontiguousarray(np.atleast_1d(out)))


def multi_contract(x: DenseTensor, y: DenseTensor, modes_x, modes_y) -> DenseTensor:
    """Multi-mode contraction; generalizes :func:`contract` to paired mode lists."""
    modes_x = [int(m) for m in modes_x]
    modes_y = [int(m) for m in modes_y]
    if len(modes_x) != len(modes_y):
        raise ShapeError("mode lists must have equal length")
    if len(set(modes_x)) != len(modes_x) or len(set(modes_y)) != len(modes_y):
        raise ShapeError("mode lists must not repeat modes")
    for mx, my in zip(modes_x, modes_y):
        _check_mode(x, mx)
        _check_mode(y, my)
        if x.dims[mx] != y.dims[my]:
            raise ShapeError(f"contracted sizes differ at pair ({mx}, {my})")
    out = np.tensordot(x.data, y.data, axes=(modes_x, modes_y))
    return DenseTensor(np.ascontiguousarray(np.atleast_1d(out)))


def pad_spatial(a: np.ndarray, padding: int, axes=(0, 1)) -> np.ndarray:
    """Zero-pad the given axes symmetrically by ``padding``."""
    if padding == 0:
        return a
    width = [(0, 0)] * a.ndim
    for ax in axes:
        width[ax] = (padding, padding)
    return np.pad(a, width)


def conv2d_direct(x: DenseTensor, w: DenseTensor, g: ConvGeometry) -> DenseTensor:
    """Reference 2D convolution of activations (I1, I2, C) with a kernel
    (T, C, D1, D2), producing (O1, O2, T).

    This is the correctness oracle for the factorized pipeline: a direct
    evaluation of the cross-correlation sum, binary64 accumulation.
    """
    x = as_tensor(x)
    w = as_tensor(w)
    if x.order != 3 or w.order != 4:
        raise ShapeError(f"expected x of order 3 and w of order 4, got {x.order}/{w.order}")
    if x.dims[2] != w.dims[1]:
        raise ShapeError(f"channel mismatch: input has {x.dims[2]}, kernel expects {w.dims[1]}")
    out_h = g.out_size(x.dims[0], w.dims[2])
    out_w = g.out_size(x.dims[1], w.dims[3])
    xpad = pad_spatial(x.data.astype(np.float64, copy=False), g.padding)
    y = backend.conv2d(np.ascontiguousarray(xpad),
                       np.ascontiguousarray(w.data.astype(np.float64, copy=False)),
                       g.stride, out_h, out_w)
    return DenseTensor(y.astype(np.result_type(x.dtype, w.dtype), copy=False))
