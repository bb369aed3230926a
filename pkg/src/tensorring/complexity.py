"""Closed-form storage and FLOPS analytics for ring-factorized conv layers.

Three families of formulas live here:

* exact storage and multiply-accumulate counts of the four-sublayer
  pipeline, as functions of the rank chain and the rotation;
* piecewise storage upper bounds over the boundary rank, with the
  full-rank rank-chain estimates behind them;
* the cost model of a hand-designed ring layer with factorized channel
  modes, used only as the denominator of a FLOPS ratio.

Counts are exact integers (one multiply-accumulate = one FLOP); bounds
come back as int where the divisions are exact, float otherwise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from tensorring.dense import ConvGeometry
from tensorring.errors import ShapeError, TensorRingError


@dataclass(frozen=True)
class LayerDims:
    """Kernel and spatial extents of one conv layer."""

    out_channels: int
    in_channels: int
    kernel_h: int
    kernel_w: int
    in_h: int
    in_w: int
    out_h: int
    out_w: int

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            if getattr(self, name) < 1:
                raise ShapeError(f"{name} must be >= 1")

    @classmethod
    def for_conv(cls, out_channels: int, in_channels: int, kernel_h: int, kernel_w: int,
                 in_h: int, in_w: int, stride: int = 1, padding: int = 0) -> "LayerDims":
        g = ConvGeometry(stride, padding)
        out_h = g.out_size(in_h, kernel_h)
        out_w = g.out_size(in_w, kernel_w)
        return cls(out_channels, in_channels, kernel_h, kernel_w, in_h, in_w, out_h, out_w)


def chain_ranks(ranks, shift: int) -> tuple[int, int, int, int]:
    """Reorder a rotated-frame rank chain into pipeline order.

    Returns (r, s1, s2, s3): r borders the input-mix core, s1/s2/s3
    follow the vertical, horizontal and output-mix cores.  The core
    whose middle mode is original mode j sits at index (j - shift) % 4,
    so the input-mix core (mode 1) starts at (1 - shift) % 4.
    """
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 4:
        raise ShapeError(f"expected 4 ranks, got {len(ranks)}")
    if any(r < 1 for r in ranks):
        raise ShapeError(f"ranks must be positive, got {ranks}")
    a = (1 - shift) % 4
    return (ranks[a], ranks[(a + 1) % 4], ranks[(a + 2) % 4], ranks[(a + 3) % 4])


def storage_tr(ranks, dims: LayerDims, shift: int) -> int:
    """Stored entries of the four cores for the given rank chain."""
    r, s1, s2, s3 = chain_ranks(ranks, shift)
    return (r * dims.in_channels * s1
            + s1 * dims.kernel_h * s2
            + s2 * dims.kernel_w * s3
            + s3 * dims.out_channels * r)


def flops_tr(ranks, dims: LayerDims, shift: int) -> int:
    """Multiply-accumulate count of the four-sublayer pipeline.

    Stride-aware: each stage is charged at its true output extent, so
    the vertical stage runs at (out_h, in_w) and later stages at
    (out_h, out_w).
    """
    r, s1, s2, s3 = chain_ranks(ranks, shift)
    return (r * dims.in_channels * s1 * dims.in_h * dims.in_w
            + s1 * dims.kernel_h * s2 * r * dims.out_h * dims.in_w
            + s2 * dims.kernel_w * s3 * r * dims.out_h * dims.out_w
            + s3 * dims.out_channels * r * dims.out_h * dims.out_w)


def _div(a: int, b):
    """Exact quotient as int, inexact as float."""
    return a // b if a % b == 0 else a / b


def _check_bound_args(shift: int, r1, t: int, c: int, d: int) -> None:
    if shift not in (0, 1, 2, 3):
        raise TensorRingError(f"shift must be in 0..3, got {shift}")
    if min(t, c, d) < 1:
        raise TensorRingError("channel and kernel sizes must be >= 1")
    if r1 < 1:
        raise TensorRingError(f"boundary rank must be >= 1, got {r1}")


def storage_bound(shift: int, r1: int, t: int, c: int, d: int) -> int | float:
    """Worst-case stored entries over the boundary rank, per rotation.

    Piecewise in r1: the pieces switch where one factor of the
    full-rank rank chain stops being the binding minimum.  Valid r1
    ranges are [1, t] for shift 0, [1, c] for shift 1, and {1, d} for
    shifts 2 and 3 (square d x d kernels assumed).
    """
    _check_bound_args(shift, r1, t, c, d)
    if shift == 0:
        if r1 > t:
            raise TensorRingError(f"boundary rank {r1} out of range [1, {t}] for shift 0")
        if r1 * r1 * d * d <= t * c:
            return t * t + t * c * d * d + (d ** 4 + d * d) * r1 * r1
        q = _div(t * c, r1)
        if r1 * r1 < t * c:
            return t * t + q * q + t * c * d * d + d * d * r1 * r1
        qd = _div(t * c * d, r1)
        return t * t + q * q + qd * qd + t * c * d * d
    if shift == 1:
        if r1 > c:
            raise TensorRingError(f"boundary rank {r1} out of range [1, {c}] for shift 1")
        q = _div(c * d, r1)
        if r1 * r1 * t <= d * d * c:
            return c * c + q * q + c * t * d * d + t * t * r1 * r1
        qd = _div(c * d * d, r1)
        return c * c + q * q + qd * qd + c * t * d * d
    if r1 not in (1, d):
        raise TensorRingError(f"boundary rank {r1} must be 1 or {d} for shift {shift}")
    if shift == 2:
        if r1 == 1:
            return d * d + d ** 4 + c * t * d * d + c * c
        return 2 * d * d + c * t * d * d + d * d * c * c
    if r1 == 1:
        return 2 * d * d + c * t * d * d + c * c * d * d
    return d * d + d ** 4 + c * t * d * d + t * t


def rank_bounds(shift: int, r1: int, t: int, c: int, d: int) -> tuple:
    """Full-rank estimates (R2, R3, R4) of the chain after the boundary.

    Each step is capped by both what the previous step can feed it and
    what the remaining modes can absorb.  Inexact divisions are
    reported as floats rather than floored.
    """
    _check_bound_args(shift, r1, t, c, d)
    dims = ((t, c, d, d), (c, d, d, t), (d, d, t, c), (d, t, c, d))[shift]
    j1, j2, j3, j4 = dims
    r2 = _div(min(j1, j2 * j3 * j4), r1)
    r3 = min(r2 * j2, j3 * j4 * r1)
    r4 = min(r3 * j3, j4 * r1)
    return (r2, r3, r4)


@dataclass(frozen=True)
class TensorizedTRSpec:
    """Factorized-channel ring layer: three factors per channel mode
    plus one uniform rank."""

    in_factors: tuple[int, int, int]
    out_factors: tuple[int, int, int]
    rank: int

    def __post_init__(self) -> None:
        if len(self.in_factors) != 3 or len(self.out_factors) != 3:
            raise ShapeError("channel factorizations must have exactly 3 factors")
        if any(f < 1 for f in self.in_factors + self.out_factors):
            raise ShapeError("factors must be >= 1")
        if self.rank < 1:
            raise ShapeError(f"rank must be >= 1, got {self.rank}")


def _prod3(f) -> int:
    return f[0] * f[1] * f[2]


def flops_tensorized_tr(spec: TensorizedTRSpec, dims: LayerDims) -> int:
    """Multiply count of the factorized-channel ring layer."""
    if _prod3(spec.in_factors) != dims.in_channels:
        raise ShapeError(
            f"in_factors {spec.in_factors} do not multiply to {dims.in_channels}"
        )
    if _prod3(spec.out_factors) != dims.out_channels:
        raise ShapeError(
            f"out_factors {spec.out_factors} do not multiply to {dims.out_channels}"
        )
    r = spec.rank
    mix = (spec.in_factors[0] * spec.in_factors[1]
           + dims.in_channels + dims.out_channels
           + spec.out_factors[0] * spec.out_factors[1])
    spatial = (dims.in_channels * dims.in_h * dims.in_w
               + dims.kernel_h * dims.kernel_w * dims.in_h * dims.in_w
               + dims.out_channels * dims.out_h * dims.out_w)
    return r ** 3 * mix + r * r * spatial


@dataclass(frozen=True)
class TensorizedLayer:
    """One benchmark layer: conv extents plus its channel factorizations."""

    dims: LayerDims
    in_factors: tuple[int, int, int]
    out_factors: tuple[int, int, int]


def _bench(in_hw, out_hw, c, t, jf, of) -> TensorizedLayer:
    dims = LayerDims(t, c, 3, 3, in_hw, in_hw, out_hw, out_hw)
    return TensorizedLayer(dims, jf, of)


BENCHMARK_LAYERS: dict[str, TensorizedLayer] = {
    "L1": _bench(32, 32, 16, 16, (4, 2, 2), (4, 2, 2)),
    "L2": _bench(32, 16, 16, 32, (4, 4, 1), (4, 4, 2)),
    "L3": _bench(16, 16, 32, 32, (4, 4, 2), (4, 4, 2)),
    "L4": _bench(16, 8, 32, 64, (4, 4, 2), (4, 4, 4)),
    "L5": _bench(8, 8, 64, 64, (4, 4, 4), (4, 4, 4)),
}


def flops_ratio(rank: int, layer: TensorizedLayer) -> float:
    """Rank-dependent FLOPS of the sliced pipeline relative to the
    factorized-channel layer, with the terms shared by both cost models
    cancelled.  Strictly increasing in ``rank``."""
    if rank < 1:
        raise TensorRingError(f"rank must be >= 1, got {rank}")
    d = layer.dims
    if d.kernel_h != d.kernel_w:
        raise ShapeError("ratio model assumes square kernels")
    k = d.kernel_h
    num = (rank * k * d.in_h * d.in_w + rank * k * d.out_h * d.in_w)
    mix = (layer.in_factors[0] * layer.in_factors[1]
           + d.in_channels + d.out_channels
           + layer.out_factors[0] * layer.out_factors[1])
    den = rank * mix + k * k * d.in_h * d.in_w
    return num / den


def boundary_rank_range(shift: int, t: int, c: int, d: int) -> list[int]:
    """Admissible boundary ranks per rotation for the bound curves."""
    if shift == 0:
        return list(range(1, t + 1))
    if shift == 1:
        return list(range(1, c + 1))
    if shift in (2, 3):
        return [1, d] if d != 1 else [1]
    raise TensorRingError(f"shift must be in 0..3, got {shift}")


def bound_curve_rows(t: int, c: int, d: int) -> list[tuple[int, int, float, int | float]]:
    """(shift, r1, normalized r1, bound) rows for all four rotations."""
    rows = []
    for shift in range(4):
        r1s = boundary_rank_range(shift, t, c, d)
        top = r1s[-1]
        for r1 in r1s:
            rows.append((shift, r1, r1 / top, storage_bound(shift, r1, t, c, d)))
    return rows


def write_bound_curves(path, t: int, c: int, d: int) -> int:
    """Emit the bound curves as CSV; returns the number of data rows."""
    rows = bound_curve_rows(t, c, d)
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["permutation", "R1", "normalized_R1", "bound"])
        for shift, r1, norm, bound in rows:
            out.writerow([shift, r1, f"{norm:.10g}", bound])
    return len(rows)
