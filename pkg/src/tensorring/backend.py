"""Kernel backend selection.

The compiled Cython kernels are preferred; the pure-NumPy twin is used when
the extension is unavailable or ``TENSORRING_PURE=1`` is set.  Both expose the
same functions with identical contracts (``conv2d``, ``conv1d_axis0``,
``conv1d_axis1``); results agree to floating-point roundoff.
"""

import os

from tensorring import _pykernels

_impl = _pykernels
if not os.environ.get("TENSORRING_PURE"):
    try:
        from tensorring import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

conv2d = _impl.conv2d
conv1d_axis0 = _impl.conv1d_axis0
conv1d_axis1 = _impl.conv1d_axis1


def backend_name() -> str:
    """Name of the active kernel backend: 'cython' or 'python'."""
    return _impl.BACKEND
