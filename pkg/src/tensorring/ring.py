"""Ring-factorized tensors: a cyclic chain of 3-way cores.

An order-N tensor with dims (J_1, ..., J_N) is represented by cores
G_n of shape (R_n, J_n, R_{n+1}) with R_{N+1} = R_1; the element value
is the trace of the product of the corresponding lateral slices.

Cores here always describe the tensor *after* a cyclic left rotation of
its modes by ``shift``.  Rotating the core list by j is equivalent to
rotating the underlying tensor's modes by j, so both frames are kept in
sync through :func:`rotate_cores`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tensorring.dense import SUPPORTED_DTYPES, DenseTensor, circular_shift
from tensorring.errors import RankChainError, ShapeError


def rotate_left(seq, k: int) -> tuple:
    k %= len(seq)
    return tuple(seq[k:]) + tuple(seq[:k])


@dataclass(frozen=True)
class TRCores:
    """A ring factorization plus the bookkeeping to undo the mode rotation.

    cores      tuple of 3-way arrays, cores[n] has shape (R_n, J_n, R_{n+1})
    shift      how far the original modes were rotated left before factorizing
    orig_dims  dims of the unrotated tensor
    """

    cores: tuple
    shift: int
    orig_dims: tuple

    def __post_init__(self) -> None:
        cores = tuple(np.ascontiguousarray(c) for c in self.cores)
        if len(cores) < 2:
            raise ShapeError("a ring needs at least 2 cores")
        dtypes = {c.dtype for c in cores}
        if len(dtypes) != 1 or cores[0].dtype not in SUPPORTED_DTYPES:
            raise ShapeError(f"cores must share one float32/float64 dtype, got {dtypes}")
        for i, c in enumerate(cores):
            if c.ndim != 3:
                raise ShapeError(f"core {i} must be 3-way, got shape {c.shape}")
        n = len(cores)
        for i, c in enumerate(cores):
            nxt = cores[(i + 1) % n]
            if c.shape[2] != nxt.shape[0]:
                raise RankChainError(
                    f"rank chain broken between cores {i} and {(i + 1) % n}: "
                    f"{c.shape[2]} != {nxt.shape[0]}"
                )
        if not 0 <= self.shift < n:
            raise ShapeError(f"shift {self.shift} out of range for {n} cores")
        orig = tuple(int(d) for d in self.orig_dims)
        if len(orig) != n:
            raise ShapeError(f"orig_dims {orig} must have one entry per core")
        mid = tuple(c.shape[1] for c in cores)
        if rotate_left(orig, self.shift) != mid:
            raise ShapeError(
                f"core mode sizes {mid} do not match orig_dims {orig} rotated by {self.shift}"
            )
        object.__setattr__(self, "cores", cores)
        object.__setattr__(self, "orig_dims", orig)

    @property
    def order(self) -> int:
        return len(self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        """(R_1, ..., R_N) in the rotated frame; R_1 is the boundary rank."""
        return tuple(c.shape[0] for c in self.cores)

    @property
    def shifted_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def dtype(self) -> np.dtype:
        return self.cores[0].dtype

    def astype(self, dtype) -> "TRCores":
        dtype = np.dtype(dtype)
        if dtype == self.dtype:
            return self
        return TRCores(tuple(c.astype(dtype) for c in self.cores), self.shift, self.orig_dims)


def param_count(tr: TRCores) -> int:
    """Total number of stored core entries."""
    return int(sum(c.size for c in tr.cores))


def rotate_cores(tr: TRCores, j: int) -> TRCores:
    """Rotate the core list left by j (same tensor, frame rotated j further)."""
    j %= tr.order
    if j == 0:
        return tr
    return TRCores(rotate_left(tr.cores, j), (tr.shift + j) % tr.order, tr.orig_dims)


def reconstruct_shifted(tr: TRCores) -> DenseTensor:
    """Densify into the rotated frame (dims = shifted_dims).

    The chain is opened at the smallest boundary rank so the working
    array stays R_min^2 x prod(J) instead of R_1^2 x prod(J); the frame
    rotation this introduces is undone on the dense result.
    """
    pivot = int(np.argmin(tr.ranks))
    cores = rotate_left(tr.cores, pivot)
    acc = cores[0].astype(np.float64, copy=False)
    for c in cores[1:]:
        acc = np.tensordot(acc, c.astype(np.float64, copy=False), axes=([acc.ndim - 1], [0]))
    dense = np.einsum("i...i->...", acc)
    out = circular_shift(DenseTensor(dense), (tr.order - pivot) % tr.order)
    return out.astype(tr.dtype)


def tr_reconstruct(tr: TRCores) -> DenseTensor:
    """Densify into the original frame (dims = orig_dims)."""
    ws = reconstruct_shifted(tr)
    return circular_shift(ws, (tr.order - tr.shift) % tr.order)


def tr_to_tensors(tr: TRCores, prefix: str = "") -> dict[str, DenseTensor]:
    """Flatten to named tensors for archiving: core0..core{N-1} plus a
    meta vector (N, shift, R_1..R_N) widened to the core dtype."""
    out = {f"{prefix}core{i}": DenseTensor(c) for i, c in enumerate(tr.cores)}
    meta = np.array([tr.order, tr.shift, *tr.ranks], dtype=tr.dtype)
    out[f"{prefix}meta"] = DenseTensor(meta)
    return out


def tr_from_tensors(tensors: dict[str, DenseTensor], prefix: str = "") -> TRCores:
    """Rebuild a ring from tensors produced by :func:`tr_to_tensors`."""
    key = f"{prefix}meta"
    if key not in tensors:
        raise ShapeError(f"missing {key!r} tensor")
    meta = tensors[key].data
    if meta.ndim != 1 or meta.size < 2:
        raise ShapeError(f"malformed {key!r} tensor")
    n = int(meta[0])
    shift = int(meta[1])
    if meta.size != 2 + n:
        raise ShapeError(f"{key!r} length {meta.size} does not match order {n}")
    cores = []
    for i in range(n):
        ck = f"{prefix}core{i}"
        if ck not in tensors:
            raise ShapeError(f"missing {ck!r} tensor")
        cores.append(tensors[ck].data)
    ranks = tuple(int(r) for r in meta[2:])
    got = tuple(c.shape[0] for c in cores)
    if got != ranks:
        raise RankChainError(f"stored ranks {ranks} disagree with core shapes {got}")
    mid = tuple(c.shape[1] for c in cores)
    orig = rotate_left(mid, (n - shift) % n)
    return TRCores(tuple(cores), shift, orig)
