"""Ring-factorized compression of convolutional kernels.

A 4-way conv kernel is represented as a cyclic chain of four 3-way
cores; one dense convolution then splits into four cheap sublayers.
The factorization picks, over all cyclic mode rotations and admissible
boundary ranks, the candidate with the fewest stored entries at a
prescribed relative error.
"""

from tensorring.archive import (load_archive, read_archive_bytes, save_archive,
                                write_archive_bytes)
from tensorring.backend import backend_name
from tensorring.complexity import (BENCHMARK_LAYERS, LayerDims, TensorizedLayer,
                                   TensorizedTRSpec, bound_curve_rows, chain_ranks,
                                   flops_ratio, flops_tensorized_tr, flops_tr,
                                   rank_bounds, storage_bound, storage_tr,
                                   write_bound_curves)
from tensorring.decompose import (Candidate, SearchResult, TruncatedSVD, delta_schedule,
                                  divisors, min_storage_search, relative_error,
                                  tr_svd, truncated_svd)
from tensorring.dense import (ConvGeometry, DenseTensor, as_tensor, circular_shift,
                              contract, conv2d_direct, fold, multi_contract, unfold)
from tensorring.errors import (ArchiveError, DivisorError, GeometryError, RankChainError,
                               ShapeError, TensorRingError)
from tensorring.network import (BUILTIN_NETWORKS, CompressionReport, LayerReport,
                                LayerSpec, NetworkSpec, archive_param_count,
                                baseline_counts, builtin_network, compress_network,
                                conv_dims, fcr, load_network_spec, network_from_json,
                                network_to_json, pcr, save_network_spec,
                                synthetic_weights)
from tensorring.pipeline import FlopCounter, TRConvLayer, tr_convolution
from tensorring.ring import (TRCores, param_count, rotate_cores, tr_from_tensors,
                             tr_reconstruct, tr_to_tensors)

__version__ = "0.1.0"

__all__ = [
    "ArchiveError", "BENCHMARK_LAYERS", "BUILTIN_NETWORKS", "Candidate",
    "CompressionReport", "ConvGeometry", "DenseTensor", "DivisorError",
    "FlopCounter", "GeometryError", "LayerDims", "LayerReport", "LayerSpec",
    "NetworkSpec", "RankChainError", "SearchResult", "ShapeError", "TRConvLayer",
    "TRCores", "TensorRingError", "TensorizedLayer", "TensorizedTRSpec",
    "TruncatedSVD", "archive_param_count", "as_tensor", "backend_name",
    "baseline_counts",
    "bound_curve_rows", "builtin_network", "chain_ranks", "circular_shift",
    "compress_network", "contract", "conv2d_direct", "conv_dims",
    "delta_schedule", "divisors", "fcr", "flops_ratio", "flops_tensorized_tr",
    "flops_tr", "fold", "load_archive", "load_network_spec", "min_storage_search",
    "multi_contract", "network_from_json", "network_to_json", "param_count",
    "pcr", "rank_bounds", "read_archive_bytes", "relative_error", "rotate_cores",
    "save_archive", "save_network_spec", "storage_bound", "storage_tr",
    "synthetic_weights", "tr_convolution", "tr_from_tensors", "tr_reconstruct",
    "tr_svd", "tr_to_tensors", "truncated_svd", "unfold", "write_archive_bytes",
    "write_bound_curves",
]
