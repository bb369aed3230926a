"""TARC: a tiny byte-exact archive for named dense tensors.

Layout (all integers little-endian):

    magic   4 bytes  b"TARC"
    version u32      currently 1
    count   u32      number of tensors
    then per tensor, in order:
        name_len u32
        name     name_len bytes, UTF-8
        dtype    u8   0 = binary32, 1 = binary64
        ndim     u8
        dims     ndim x u64
        payload  raw row-major values, little-endian

Every byte is specified so that independent implementations can produce
identical files from identical inputs.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from tensorring.dense import DenseTensor
from tensorring.errors import ArchiveError

MAGIC = b"TARC"
VERSION = 1

_DTYPE_CODES = {np.dtype("<f4"): 0, np.dtype("<f8"): 1}
_CODE_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


def write_archive_bytes(tensors: dict[str, DenseTensor]) -> bytes:
    """Serialize named tensors; iteration order of the dict is preserved."""
    parts = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, t in tensors.items():
        if not isinstance(t, DenseTensor):
            t = DenseTensor(np.asarray(t))
        nb = name.encode("utf-8")
        arr = np.ascontiguousarray(t.data, dtype=t.data.dtype.newbyteorder("<"))
        code = _DTYPE_CODES[np.dtype(arr.dtype.str)]
        parts.append(struct.pack("<I", len(nb)))
        parts.append(nb)
        parts.append(struct.pack("<BB", code, arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


def read_archive_bytes(buf: bytes) -> dict[str, DenseTensor]:
    """Parse archive bytes back into named tensors, preserving order."""
    view = memoryview(buf)
    if len(view) < 12 or bytes(view[:4]) != MAGIC:
        raise ArchiveError("not a TARC archive (bad magic)")
    version, count = struct.unpack_from("<II", view, 4)
    if version != VERSION:
        raise ArchiveError(f"unsupported archive version {version}")
    pos = 12
    out: dict[str, DenseTensor] = {}

    def need(n: int) -> None:
        if pos + n > len(view):
            raise ArchiveError("truncated archive")

    for _ in range(count):
        need(4)
        (name_len,) = struct.unpack_from("<I", view, pos)
        pos += 4
        need(name_len)
        name = bytes(view[pos : pos + name_len]).decode("utf-8")
        pos += name_len
        need(2)
        code, ndim = struct.unpack_from("<BB", view, pos)
        pos += 2
        if code not in _CODE_DTYPES:
            raise ArchiveError(f"unknown dtype code {code} for tensor {name!r}")
        need(8 * ndim)
        dims = struct.unpack_from(f"<{ndim}Q", view, pos)
        pos += 8 * ndim
        dtype = _CODE_DTYPES[code]
        n_items = int(np.prod(dims, dtype=np.int64)) if ndim else 1
        n_bytes = n_items * dtype.itemsize
        need(n_bytes)
        arr = np.frombuffer(view, dtype=dtype, count=n_items, offset=pos).reshape(dims)
        pos += n_bytes
        if name in out:
            raise ArchiveError(f"duplicate tensor name {name!r}")
        out[name] = DenseTensor(arr.astype(arr.dtype.newbyteorder("=")))
    if pos != len(view):
        raise ArchiveError(f"{len(view) - pos} trailing bytes after last tensor")
    return out


def save_archive(path, tensors: dict[str, DenseTensor]) -> None:
    Path(path).write_bytes(write_archive_bytes(tensors))


def load_archive(path) -> dict[str, DenseTensor]:
    return read_archive_bytes(Path(path).read_bytes())
