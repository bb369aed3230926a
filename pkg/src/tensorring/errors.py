"""Exception types shared across the package."""


class TensorRingError(ValueError):
    """Base class for all contract violations raised by this package."""


class ShapeError(TensorRingError):
    """Mode out of range, dimension mismatch, or malformed operand."""


class GeometryError(TensorRingError):
    """Convolution geometry does not produce integral positive output sizes."""


class RankChainError(TensorRingError):
    """Adjacent core ranks of a tensor-ring do not chain (wrap-around included)."""


class DivisorError(TensorRingError):
    """Requested first rank does not divide the truncated rank."""


class ArchiveError(TensorRingError):
    """Tensor-archive file is malformed or uses an unsupported version."""
