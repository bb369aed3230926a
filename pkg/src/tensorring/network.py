"""Network descriptions, baseline accounting, and whole-network compression.

A network is an ordered list of layers (convs and fully-connected) plus
an input shape; spatial extents are derived by walking the chain, so
the JSON form stays small.  Compression replaces every eligible conv
kernel with its minimum-storage ring factorization and reports per-layer
and network-wide parameter/FLOPS ratios.

Accounting rules (chosen to reproduce the usual published magnitudes):
conv parameters T*C*D1*D2 plus 2T for batch-norm, no conv biases; conv
FLOPS are one per multiply-accumulate at the output extent; batch-norm,
activations and pooling count zero FLOPS; fully-connected layers count
in*out + out parameters and in*out FLOPS.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tensorring.complexity import LayerDims, flops_tr
from tensorring.dense import ConvGeometry, DenseTensor
from tensorring.decompose import SearchResult, min_storage_search
from tensorring.errors import ArchiveError, ShapeError, TensorRingError
from tensorring.ring import tr_to_tensors


@dataclass(frozen=True)
class LayerSpec:
    """One layer of a network description.

    Conv layers may carry a post-conv subsample factor (``pool``) and a
    ``branch`` marker for kernels that run parallel to the main chain
    (shortcut projections) and therefore do not advance it.
    """

    name: str
    kind: str
    out_channels: int = 0
    in_channels: int = 0
    kernel_h: int = 0
    kernel_w: int = 0
    geometry: ConvGeometry = field(default_factory=ConvGeometry)
    compress: bool = False
    pool: int = 1
    branch: bool = False
    in_features: int = 0
    out_features: int = 0

    def __post_init__(self) -> None:
        if not self.name:
            raise ShapeError("layer name must be non-empty")
        if self.kind == "conv":
            if min(self.out_channels, self.in_channels, self.kernel_h, self.kernel_w) < 1:
                raise ShapeError(f"conv layer {self.name!r} has non-positive dims")
            if self.pool < 1:
                raise ShapeError(f"conv layer {self.name!r} has pool < 1")
        elif self.kind == "fc":
            if min(self.in_features, self.out_features) < 1:
                raise ShapeError(f"fc layer {self.name!r} has non-positive dims")
            if self.compress:
                raise ShapeError(f"fc layer {self.name!r} cannot be compressed")
        else:
            raise ShapeError(f"unknown layer kind {self.kind!r}")

    @classmethod
    def conv(cls, name: str, out_channels: int, in_channels: int,
             kernel: int | tuple[int, int], stride: int = 1, padding: int = 0,
             compress: bool = True, pool: int = 1, branch: bool = False) -> "LayerSpec":
        kh, kw = (kernel, kernel) if isinstance(kernel, int) else kernel
        return cls(name=name, kind="conv", out_channels=out_channels,
                   in_channels=in_channels, kernel_h=kh, kernel_w=kw,
                   geometry=ConvGeometry(stride, padding), compress=compress,
                   pool=pool, branch=branch)

    @classmethod
    def fc(cls, name: str, in_features: int, out_features: int) -> "LayerSpec":
        return cls(name=name, kind="fc", in_features=in_features,
                   out_features=out_features, compress=False)


@dataclass(frozen=True)
class NetworkSpec:
    """Named layer chain plus the (H, W, C) input it consumes."""

    name: str
    input_shape: tuple[int, int, int]
    layers: tuple[LayerSpec, ...]

    def __post_init__(self) -> None:
        shape = tuple(int(d) for d in self.input_shape)
        if len(shape) != 3 or min(shape) < 1:
            raise ShapeError(f"input shape must be positive (H, W, C), got {shape}")
        layers = tuple(self.layers)
        if not layers:
            raise ShapeError("network needs at least one layer")
        names = [l.name for l in layers]
        if len(set(names)) != len(names):
            raise ShapeError("layer names must be unique")
        first_conv = next((l for l in layers if l.kind == "conv"), None)
        if first_conv is not None and first_conv.compress:
            raise ShapeError("the first conv layer must have compress=False")
        object.__setattr__(self, "input_shape", shape)
        object.__setattr__(self, "layers", layers)
        conv_dims(self)  # chain consistency

    def conv_layers(self) -> tuple[LayerSpec, ...]:
        return tuple(l for l in self.layers if l.kind == "conv")


def conv_dims(net: NetworkSpec) -> dict[str, LayerDims]:
    """Walk the chain and resolve every conv layer's spatial extents.

    Branch layers consume the current chain state without advancing it;
    fully-connected layers accept either the channel count (global-pool
    convention) or the fully flattened activation size.
    """
    h, w, ch = net.input_shape
    out: dict[str, LayerDims] = {}
    for layer in net.layers:
        if layer.kind == "conv":
            if layer.in_channels != ch:
                raise ShapeError(
                    f"layer {layer.name!r} expects {layer.in_channels} channels, "
                    f"chain carries {ch}"
                )
            g = layer.geometry
            d = LayerDims.for_conv(layer.out_channels, layer.in_channels,
                                   layer.kernel_h, layer.kernel_w, h, w,
                                   g.stride, g.padding)
            out[layer.name] = d
            if not layer.branch:
                h, w, ch = d.out_h, d.out_w, layer.out_channels
                if layer.pool > 1:
                    h, w = h // layer.pool, w // layer.pool
                    if min(h, w) < 1:
                        raise ShapeError(f"pool after {layer.name!r} empties the activations")
        else:
            if layer.in_features not in (ch, ch * h * w):
                raise ShapeError(
                    f"fc layer {layer.name!r} expects {layer.in_features} features, "
                    f"chain carries {ch} channels at {h}x{w}"
                )
            h, w, ch = 1, 1, layer.out_features
    return out


def _layer_counts(layer: LayerSpec, dims: dict[str, LayerDims]) -> tuple[int, int]:
    if layer.kind == "conv":
        d = dims[layer.name]
        kernel = layer.out_channels * layer.in_channels * layer.kernel_h * layer.kernel_w
        return kernel + 2 * layer.out_channels, kernel * d.out_h * d.out_w
    weights = layer.in_features * layer.out_features
    return weights + layer.out_features, weights


def baseline_counts(net: NetworkSpec) -> tuple[int, int]:
    """(parameters, FLOPS) of the dense network."""
    dims = conv_dims(net)
    params = flops = 0
    for layer in net.layers:
        p, f = _layer_counts(layer, dims)
        params += p
        flops += f
    return params, flops


def pcr(baseline_params: int, compressed_params: int) -> float:
    """Parameter compression ratio: baseline over compressed."""
    if compressed_params <= 0:
        raise TensorRingError("compressed parameter count must be positive")
    return baseline_params / compressed_params


def fcr(baseline_flops: int, compressed_flops: int) -> float:
    """FLOPS compression ratio: baseline over compressed."""
    if compressed_flops <= 0:
        raise TensorRingError("compressed FLOPS count must be positive")
    return baseline_flops / compressed_flops


# ---------------------------------------------------------------------------
# built-in architectures


def _cifar_resnet(name: str, blocks_per_stage: int) -> NetworkSpec:
    layers = [LayerSpec.conv("conv1", 16, 3, 3, stride=1, padding=1, compress=False)]
    ch = 16
    for stage, width in enumerate((16, 32, 64), start=1):
        for b in range(blocks_per_stage):
            stride = 2 if stage > 1 and b == 0 else 1
            prefix = f"layer{stage}.{b}"
            layers.append(LayerSpec.conv(f"{prefix}.conv1", width, ch, 3,
                                         stride=stride, padding=1))
            layers.append(LayerSpec.conv(f"{prefix}.conv2", width, width, 3,
                                         stride=1, padding=1))
            ch = width
    layers.append(LayerSpec.fc("fc", 64, 10))
    return NetworkSpec(name, (32, 32, 3), tuple(layers))


def _imagenet_resnet(name: str, blocks: tuple[int, int, int, int]) -> NetworkSpec:
    layers = [LayerSpec.conv("conv1", 64, 3, 7, stride=2, padding=3,
                             compress=False, pool=2)]
    ch = 64
    for stage, (width, n) in enumerate(zip((64, 128, 256, 512), blocks), start=1):
        for b in range(n):
            stride = 2 if stage > 1 and b == 0 else 1
            prefix = f"layer{stage}.{b}"
            if stride != 1 or ch != width:
                layers.append(LayerSpec.conv(f"{prefix}.downsample.0", width, ch, 1,
                                             stride=stride, padding=0, branch=True))
            layers.append(LayerSpec.conv(f"{prefix}.conv1", width, ch, 3,
                                         stride=stride, padding=1))
            layers.append(LayerSpec.conv(f"{prefix}.conv2", width, width, 3,
                                         stride=1, padding=1))
            ch = width
    layers.append(LayerSpec.fc("fc", 512, 1000))
    return NetworkSpec(name, (224, 224, 3), tuple(layers))


def _vgg19_cifar() -> NetworkSpec:
    plan = ((64, 2), (128, 2), (256, 4), (512, 4), (512, 4))
    layers = []
    ch = 3
    idx = 0
    for width, n in plan:
        for b in range(n):
            layers.append(LayerSpec.conv(f"features.{idx}", width, ch, 3,
                                         stride=1, padding=1,
                                         compress=bool(layers),
                                         pool=2 if b == n - 1 else 1))
            ch = width
            idx += 2  # conv + activation slot
        idx += 1  # pool slot
    layers.append(LayerSpec.fc("classifier", 512, 10))
    return NetworkSpec("vgg19-cifar", (32, 32, 3), tuple(layers))


_BUILDERS = {
    "resnet20": lambda: _cifar_resnet("resnet20", 3),
    "resnet32": lambda: _cifar_resnet("resnet32", 5),
    "resnet56": lambda: _cifar_resnet("resnet56", 9),
    "vgg19-cifar": _vgg19_cifar,
    "resnet18": lambda: _imagenet_resnet("resnet18", (2, 2, 2, 2)),
    "resnet34": lambda: _imagenet_resnet("resnet34", (3, 4, 6, 3)),
}

BUILTIN_NETWORKS = tuple(sorted(_BUILDERS))


def builtin_network(name: str) -> NetworkSpec:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise TensorRingError(
            f"unknown network {name!r}; known: {', '.join(BUILTIN_NETWORKS)}"
        ) from None
    return builder()


# ---------------------------------------------------------------------------
# JSON round-trip


def network_to_json(net: NetworkSpec) -> dict:
    rows = []
    for layer in net.layers:
        if layer.kind == "conv":
            row = {
                "name": layer.name,
                "kind": "conv",
                "T": layer.out_channels,
                "C": layer.in_channels,
                "D1": layer.kernel_h,
                "D2": layer.kernel_w,
                "stride": layer.geometry.stride,
                "padding": layer.geometry.padding,
                "compress": layer.compress,
            }
            if layer.pool != 1:
                row["pool"] = layer.pool
            if layer.branch:
                row["branch"] = True
        else:
            row = {
                "name": layer.name,
                "kind": "fc",
                "in": layer.in_features,
                "out": layer.out_features,
                "compress": False,
            }
        rows.append(row)
    return {"name": net.name, "input": list(net.input_shape), "layers": rows}


def network_from_json(doc: dict) -> NetworkSpec:
    try:
        name = doc["name"]
        h, w, c = doc["input"]
        rows = doc["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed network document: {exc}") from None
    layers = []
    for row in rows:
        try:
            kind = row["kind"]
            if kind == "conv":
                layers.append(LayerSpec.conv(
                    row["name"], int(row["T"]), int(row["C"]),
                    (int(row["D1"]), int(row["D2"])),
                    stride=int(row["stride"]), padding=int(row["padding"]),
                    compress=bool(row["compress"]),
                    pool=int(row.get("pool", 1)),
                    branch=bool(row.get("branch", False)),
                ))
            elif kind == "fc":
                layers.append(LayerSpec.fc(row["name"], int(row["in"]), int(row["out"])))
            else:
                raise ShapeError(f"unknown layer kind {kind!r}")
        except KeyError as exc:
            raise ShapeError(f"layer row missing key {exc}") from None
    return NetworkSpec(str(name), (int(h), int(w), int(c)), tuple(layers))


def save_network_spec(path, net: NetworkSpec) -> None:
    Path(path).write_text(json.dumps(network_to_json(net), indent=2) + "\n")


def load_network_spec(path) -> NetworkSpec:
    return network_from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# synthetic weights and compression


def bn_name(layer_name: str) -> str:
    return f"{layer_name}/bn"


def archive_param_count(tensors: dict[str, DenseTensor]) -> int:
    """Model parameters stored in an archive: entry count over all
    tensors except ``*/meta`` ring descriptors, which are bookkeeping."""
    return int(sum(
        np.prod(t.dims, dtype=np.int64)
        for name, t in tensors.items()
        if name != "meta" and not name.endswith("/meta")
    ))


def synthetic_weights(net: NetworkSpec, seed: int = 0, dtype=np.float32) -> dict[str, DenseTensor]:
    """Seeded Gaussian stand-in for a trained checkpoint.

    Carries everything the accounting rules count: conv kernels, (2, T)
    batch-norm rows (scale, shift), fc weights and biases; entry totals
    therefore match baseline_counts exactly.
    """
    dtype = np.dtype(dtype)
    rng = np.random.default_rng(seed)
    out: dict[str, DenseTensor] = {}
    for layer in net.layers:
        if layer.kind == "conv":
            shape = (layer.out_channels, layer.in_channels, layer.kernel_h, layer.kernel_w)
            out[layer.name] = DenseTensor(rng.standard_normal(shape).astype(dtype))
            bn = np.stack([np.ones(layer.out_channels), np.zeros(layer.out_channels)])
            out[bn_name(layer.name)] = DenseTensor(bn.astype(dtype))
        else:
            w = rng.standard_normal((layer.out_features, layer.in_features))
            out[f"{layer.name}/weight"] = DenseTensor(w.astype(dtype))
            out[f"{layer.name}/bias"] = DenseTensor(np.zeros(layer.out_features, dtype=dtype))
    return out


@dataclass(frozen=True)
class LayerReport:
    """Per-layer line of a compression report."""

    name: str
    kind: str
    params: int
    flops: int
    compressed_params: int
    compressed_flops: int
    compressed: bool
    storage: int | None = None
    shift: int | None = None
    first_rank: int | None = None
    ranks: tuple[int, ...] | None = None
    achieved_rel_error: float | None = None
    seconds: float | None = None


@dataclass(frozen=True)
class CompressionReport:
    """Network compression summary; totals are column sums of the rows."""

    network: str
    eps: float
    rows: tuple[LayerReport, ...]
    baseline_params: int = 0
    baseline_flops: int = 0
    compressed_params: int = 0
    compressed_flops: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "baseline_params", sum(r.params for r in self.rows))
        object.__setattr__(self, "baseline_flops", sum(r.flops for r in self.rows))
        object.__setattr__(self, "compressed_params", sum(r.compressed_params for r in self.rows))
        object.__setattr__(self, "compressed_flops", sum(r.compressed_flops for r in self.rows))

    @property
    def pcr(self) -> float:
        return pcr(self.baseline_params, self.compressed_params)

    @property
    def fcr(self) -> float:
        return fcr(self.baseline_flops, self.compressed_flops)

    def to_json_dict(self, include_times: bool = False) -> dict:
        rows = []
        for r in self.rows:
            row = {
                "name": r.name,
                "kind": r.kind,
                "params": r.params,
                "flops": r.flops,
                "compressed_params": r.compressed_params,
                "compressed_flops": r.compressed_flops,
                "compressed": r.compressed,
            }
            if r.compressed:
                row.update({
                    "storage": r.storage,
                    "shift": r.shift,
                    "first_rank": r.first_rank,
                    "ranks": list(r.ranks),
                    "achieved_rel_error": r.achieved_rel_error,
                })
            if include_times and r.seconds is not None:
                row["seconds"] = round(r.seconds, 6)
            rows.append(row)
        return {
            "network": self.network,
            "eps": self.eps,
            "baseline": {"params": self.baseline_params, "flops": self.baseline_flops},
            "compressed": {"params": self.compressed_params, "flops": self.compressed_flops},
            "pcr": self.pcr,
            "fcr": self.fcr,
            "layers": rows,
        }

    def format_table(self) -> str:
        head = ("layer", "kind", "params", "flops", "c.params", "c.flops",
                "shift", "R1", "rel.err")
        body = []
        for r in self.rows:
            body.append((
                r.name, r.kind, str(r.params), str(r.flops),
                str(r.compressed_params), str(r.compressed_flops),
                "-" if r.shift is None else str(r.shift),
                "-" if r.first_rank is None else str(r.first_rank),
                "-" if r.achieved_rel_error is None else f"{r.achieved_rel_error:.4f}",
            ))
        body.append((
            "total", "", str(self.baseline_params), str(self.baseline_flops),
            str(self.compressed_params), str(self.compressed_flops), "", "",
            f"pcr={self.pcr:.3f} fcr={self.fcr:.3f}",
        ))
        widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
        lines = []
        for row in [head, *body]:
            cells = [row[0].ljust(widths[0])]
            cells += [row[i].rjust(widths[i]) for i in range(1, len(head))]
            lines.append("  ".join(cells).rstrip())
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines)


def _eligible(layer: LayerSpec, include_1x1: bool) -> bool:
    if layer.kind != "conv" or not layer.compress:
        return False
    if layer.kernel_h == 1 and layer.kernel_w == 1 and not include_1x1:
        return False
    return True


def compress_network(weights: dict[str, DenseTensor], net: NetworkSpec, eps: float,
                     include_1x1: bool = False, threads: int = 1,
                     collect_times: bool = False,
                     ) -> tuple[dict[str, DenseTensor], CompressionReport]:
    """Factorize every eligible conv kernel and assemble the output archive.

    Eligible kernels are replaced by their cores (archived under
    ``<layer>/core*``, ``<layer>/meta``); everything else in the input
    archive that the network references passes through untouched.
    Per-layer searches are independent and run on ``threads`` workers;
    the report is assembled in layer order regardless.
    """
    dims = conv_dims(net)
    todo: list[LayerSpec] = []
    for layer in net.layers:
        if _eligible(layer, include_1x1):
            if layer.name not in weights:
                raise ArchiveError(f"archive is missing tensor {layer.name!r}")
            expect = (layer.out_channels, layer.in_channels, layer.kernel_h, layer.kernel_w)
            got = weights[layer.name].dims
            if got != expect:
                raise ShapeError(
                    f"tensor {layer.name!r} has dims {got}, layer expects {expect}"
                )
            todo.append(layer)

    def run(layer: LayerSpec) -> tuple[SearchResult, float]:
        import time

        t0 = time.perf_counter()
        res = min_storage_search(weights[layer.name], eps)
        return res, time.perf_counter() - t0

    if threads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip((l.name for l in todo), pool.map(run, todo)))
    else:
        results = {l.name: run(l) for l in todo}

    out: dict[str, DenseTensor] = {}
    rows: list[LayerReport] = []
    for layer in net.layers:
        params, flops = _layer_counts(layer, dims)
        if layer.name in results:
            res, seconds = results[layer.name]
            comp_flops = flops_tr(res.tr.ranks, dims[layer.name], res.shift)
            out.update(tr_to_tensors(res.tr, prefix=f"{layer.name}/"))
            rows.append(LayerReport(
                name=layer.name, kind=layer.kind, params=params, flops=flops,
                compressed_params=res.storage + 2 * layer.out_channels,
                compressed_flops=comp_flops, compressed=True,
                storage=res.storage, shift=res.shift, first_rank=res.first_rank,
                ranks=res.tr.ranks, achieved_rel_error=res.achieved_rel_error,
                seconds=seconds if collect_times else None,
            ))
        else:
            rows.append(LayerReport(
                name=layer.name, kind=layer.kind, params=params, flops=flops,
                compressed_params=params, compressed_flops=flops, compressed=False,
            ))
            if layer.kind == "conv" and layer.name in weights:
                out[layer.name] = weights[layer.name]
        if layer.kind == "conv" and bn_name(layer.name) in weights:
            out[bn_name(layer.name)] = weights[bn_name(layer.name)]
        if layer.kind == "fc":
            for suffix in ("weight", "bias"):
                key = f"{layer.name}/{suffix}"
                if key in weights:
                    out[key] = weights[key]

    report = CompressionReport(network=net.name, eps=eps, rows=tuple(rows))
    return out, report
