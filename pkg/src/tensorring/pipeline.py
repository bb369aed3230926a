"""Factorized 2D convolution as four cheap sublayers.

A ring-factorized kernel (T, C, D1, D2) turns one dense convolution
into: a 1x1 input mix, a vertical 1D convolution, a horizontal 1D
convolution, and a 1x1 output mix that closes the ring.  Whatever the
rotation used at factorization time, the four cores appear consecutively
in the ring, so the same stage order works for every shift; only the
role-to-core assignment moves.

Every stage reports its multiply-accumulate count to a
:class:`FlopCounter`, measured from the actual operand shapes (padded
taps included).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tensorring import backend
from tensorring.dense import ConvGeometry, DenseTensor, as_tensor
from tensorring.errors import ShapeError
from tensorring.ring import TRCores

STAGES = ("input_mix", "conv_vertical", "conv_horizontal", "output_mix")


class FlopCounter:
    """Accumulates multiply-accumulate counts per pipeline stage."""

    def __init__(self) -> None:
        self.counts: dict[str, int] = {name: 0 for name in STAGES}

    def add(self, stage: str, out_shape, reduction: int) -> None:
        if stage not in self.counts:
            raise KeyError(f"unknown stage {stage!r}")
        self.counts[stage] += int(np.prod(out_shape, dtype=np.int64)) * int(reduction)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def as_tuple(self) -> tuple[int, int, int, int]:
        return tuple(self.counts[name] for name in STAGES)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.counts.items())
        return f"FlopCounter({inner}, total={self.total})"


@dataclass(frozen=True)
class TRConvLayer:
    """A ring-factorized conv kernel plus its stride/padding geometry."""

    tr: TRCores
    geometry: ConvGeometry = field(default_factory=ConvGeometry)

    def __post_init__(self) -> None:
        if self.tr.order != 4:
            raise ShapeError(f"conv kernels are 4-way, got order {self.tr.order}")

    @property
    def out_channels(self) -> int:
        return self.tr.orig_dims[0]

    @property
    def in_channels(self) -> int:
        return self.tr.orig_dims[1]

    @property
    def kernel_h(self) -> int:
        return self.tr.orig_dims[2]

    @property
    def kernel_w(self) -> int:
        return self.tr.orig_dims[3]

    def stage_cores(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Cores in pipeline order (input mix, vertical, horizontal, output mix).

        The core list is stored in rotated-frame order; the core whose
        middle mode is original mode j sits at index (j - shift) mod 4.
        """
        k = self.tr.shift
        c = self.tr.cores
        return (c[(1 - k) % 4], c[(2 - k) % 4], c[(3 - k) % 4], c[(0 - k) % 4])

    @classmethod
    def from_dense(cls, w, eps: float, geometry: ConvGeometry | None = None,
                   threads: int = 1) -> "TRConvLayer":
        """Factorize a dense kernel with the minimum-storage search."""
        from tensorring.decompose import min_storage_search

        res = min_storage_search(w, eps, threads=threads)
        return cls(res.tr, geometry if geometry is not None else ConvGeometry())


def _pad_axis(a: np.ndarray, axis: int, padding: int) -> np.ndarray:
    if padding == 0:
        return a
    width = [(0, 0)] * a.ndim
    width[axis] = (padding, padding)
    return np.pad(a, width)


def tr_convolution(x, layer: TRConvLayer) -> tuple[DenseTensor, FlopCounter]:
    """Run activations (I1, I2, C) through the four sublayers.

    Returns the (O1, O2, T) output and the stage-level MAC counts.
    Arithmetic runs in binary64; every stage output is cast back to the
    activation dtype, so binary32 inputs see binary32 stage boundaries.
    """
    x = as_tensor(x)
    if x.order != 3:
        raise ShapeError(f"activations must be 3-way (H, W, C), got order {x.order}")
    if x.dims[2] != layer.in_channels:
        raise ShapeError(
            f"channel mismatch: input has {x.dims[2]}, layer expects {layer.in_channels}"
        )
    g = layer.geometry
    out_h = g.out_size(x.dims[0], layer.kernel_h)
    out_w = g.out_size(x.dims[1], layer.kernel_w)
    in_core, v_core, h_core, out_core = (c.astype(np.float64, copy=False)
                                         for c in layer.stage_cores())
    counter = FlopCounter()
    dtype = x.dtype

    # 1x1 input mix over channels: (I1, I2, C) -> (I1, I2, Ra, Rb)
    z = np.tensordot(x.data.astype(np.float64, copy=False), in_core, axes=([2], [1]))
    counter.add("input_mix", z.shape, in_core.shape[1])
    z = np.ascontiguousarray(z.astype(dtype))

    # vertical 1D convolution along rows: -> (O1, I2, Ra, Rc)
    zpad = np.ascontiguousarray(_pad_axis(z.astype(np.float64, copy=False), 0, g.padding))
    zv = backend.conv1d_axis0(zpad, v_core, g.stride, out_h)
    counter.add("conv_vertical", zv.shape, v_core.shape[0] * v_core.shape[1])
    zv = np.ascontiguousarray(zv.astype(dtype))

    # horizontal 1D convolution along columns: -> (O1, O2, Ra, Rd)
    zvpad = np.ascontiguousarray(_pad_axis(zv.astype(np.float64, copy=False), 1, g.padding))
    zh = backend.conv1d_axis1(zvpad, h_core, g.stride, out_w)
    counter.add("conv_horizontal", zh.shape, h_core.shape[0] * h_core.shape[1])
    zh = np.ascontiguousarray(zh.astype(dtype))

    # 1x1 output mix closing the ring: -> (O1, O2, T)
    y = np.tensordot(zh.astype(np.float64, copy=False), out_core, axes=([3, 2], [0, 2]))
    counter.add("output_mix", y.shape, out_core.shape[0] * out_core.shape[2])
    return DenseTensor(np.ascontiguousarray(y.astype(dtype))), counter
