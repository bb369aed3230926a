"""Command-line front end.

Subcommands: decompose (one kernel), compress (whole network), curves
(storage-bound CSV), rho (pipeline-vs-tensorized FLOPS ratio CSV),
verify (self-check matrix), stats (selection histogram).

Exit codes: 0 success, 1 usage error, 2 data/contract error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from tensorring import archive as tarc
from tensorring import complexity, network
from tensorring.dense import ConvGeometry, DenseTensor, as_tensor, conv2d_direct
from tensorring.decompose import divisors, min_storage_search, tr_svd
from tensorring.errors import RankChainError, TensorRingError
from tensorring.pipeline import TRConvLayer, tr_convolution
from tensorring.ring import TRCores, param_count, tr_reconstruct, tr_to_tensors

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

_DTYPES = {"f32": np.float32, "f64": np.float64}


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: _Parser, *names: str) -> None:
    if "eps" in names:
        p.add_argument("--eps", type=float, required=True,
                       help="prescribed relative error, in [0, 1)")
    if "seed" in names:
        p.add_argument("--seed", type=int, default=0, help="RNG seed for synthetic tensors")
    if "dtype" in names:
        p.add_argument("--dtype", choices=sorted(_DTYPES), default="f64",
                       help="element type for synthetic tensors")
    if "threads" in names:
        p.add_argument("--threads", type=int, default=1, help="worker threads")
    if "time" in names:
        p.add_argument("--time", action="store_true", help="report wall-clock timings")


def _check_eps(p: _Parser, eps: float) -> None:
    if not 0.0 <= eps < 1.0:
        p.error(f"--eps must be in [0, 1), got {eps}")


def _check_seed(p: _Parser, seed: int) -> None:
    if seed < 0:
        p.error(f"--seed must be >= 0, got {seed}")


def _resolve_network(args) -> network.NetworkSpec:
    if getattr(args, "spec", None):
        return network.load_network_spec(args.spec)
    if getattr(args, "network", None):
        return network.builtin_network(args.network)
    raise TensorRingError("either --network or --spec is required")


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise TensorRingError(f"expected comma-separated integers, got {text!r}") from None
    if len(dims) != 4 or min(dims) < 1:
        raise TensorRingError(f"expected four positive dims, got {text!r}")
    return dims


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2))


# ---------------------------------------------------------------------------
# decompose


def _cmd_decompose(args) -> int:
    if args.synthetic:
        dims = _parse_dims(args.synthetic)
        rng = np.random.default_rng(args.seed)
        w = DenseTensor(rng.standard_normal(dims).astype(_DTYPES[args.dtype]))
    else:
        tensors = tarc.load_archive(args.weights)
        if args.tensor not in tensors:
            raise TensorRingError(f"archive has no tensor {args.tensor!r}")
        w = tensors[args.tensor]
        if w.order != 4:
            raise TensorRingError(f"tensor {args.tensor!r} is order {w.order}, expected 4")
    t0 = time.perf_counter()
    res = min_storage_search(w, args.eps, threads=args.threads)
    elapsed = time.perf_counter() - t0
    if args.out:
        tarc.save_archive(args.out, tr_to_tensors(res.tr))
    summary = {
        "dims": list(w.dims),
        "eps": args.eps,
        "shift": res.shift,
        "first_rank": res.first_rank,
        "ranks": list(res.tr.ranks),
        "storage": res.storage,
        "dense_size": int(np.prod(w.dims)),
        "achieved_rel_error": res.achieved_rel_error,
        "candidates_evaluated": res.candidates_evaluated,
    }
    if args.time:
        summary["seconds"] = round(elapsed, 6)
    _emit(summary)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compress


def _cmd_compress(args) -> int:
    net = _resolve_network(args)
    if args.weights:
        weights = tarc.load_archive(args.weights)
    else:
        weights = network.synthetic_weights(net, seed=args.seed, dtype=_DTYPES[args.dtype])
    compressed, report = network.compress_network(
        weights, net, args.eps, include_1x1=args.include_1x1,
        threads=args.threads, collect_times=args.time)
    if args.out:
        tarc.save_archive(args.out, compressed)
    if args.emit_spec:
        network.save_network_spec(args.emit_spec, net)
    if args.format == "table":
        print(report.format_table())
    else:
        _emit(report.to_json_dict(include_times=args.time))
    return EXIT_OK


# ---------------------------------------------------------------------------
# curves


def _cmd_curves(args) -> int:
    rows = complexity.write_bound_curves(args.out, args.T, args.C, args.D)
    _emit({"out": args.out, "rows": rows, "T": args.T, "C": args.C, "D": args.D})
    return EXIT_OK


# ---------------------------------------------------------------------------
# rho


def _cmd_rho(args) -> int:
    lines = ["layer,rank,ratio"]
    for name, layer in complexity.BENCHMARK_LAYERS.items():
        for rank in range(1, args.max_rank + 1):
            lines.append(f"{name},{rank},{complexity.flops_ratio(rank, layer):.10g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        _emit({"out": args.out, "rows": len(lines) - 1})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _inject_rank_chain(w: DenseTensor, eps: float) -> dict:
    tr = tr_svd(w, eps)
    cores = list(tr.cores)
    # lop off one lateral slice so adjacent ranks stop chaining
    widened = np.concatenate([cores[1], cores[1][:1]], axis=0)
    cores[1] = widened
    try:
        TRCores(tuple(cores), tr.shift, tr.orig_dims)
    except RankChainError as exc:
        return {"invariant": "rank-chain", "detected": True, "error": str(exc)}
    return {"invariant": "rank-chain", "detected": False,
            "error": "corruption was not detected"}


def _cmd_verify(args) -> int:
    eps_list = [float(part) for part in args.eps.split(",")] if args.eps else [0.0, 0.3]
    for eps in eps_list:
        if not 0.0 <= eps < 1.0:
            raise TensorRingError(f"eps values must be in [0, 1), got {eps}")
    dtype = _DTYPES[args.dtype]
    tol = 1e-10 if dtype == np.float64 else 1e-4

    if args.inject == "rank-chain":
        rng = np.random.default_rng(args.seed)
        w = DenseTensor(rng.standard_normal((8, 6, 3, 3)))
        outcome = _inject_rank_chain(w, 0.0)
        _emit(outcome)
        return EXIT_VERIFY

    rng = np.random.default_rng(args.seed)
    kernel = rng.standard_normal((8, 6, 3, 3))
    x = rng.standard_normal((11, 11, 6)).astype(dtype)
    cells = []
    failures = 0
    for eps in eps_list:
        w = DenseTensor(kernel.astype(dtype))
        search = min_storage_search(w, eps)
        # independent enumeration: every shift, every admissible first rank
        best = None
        for shift in range(4):
            probe = tr_svd(w, eps, shift=shift, first_rank=1)
            first_rank_total = probe.ranks[0] * probe.ranks[1]
            for r1 in divisors(first_rank_total):
                cand = tr_svd(w, eps, shift=shift, first_rank=r1)
                best = min(best, param_count(cand)) if best is not None else param_count(cand)
        optimal = search.storage == best
        bound_ok = search.achieved_rel_error <= eps + 1e-8
        for shift in range(4):
            tr = tr_svd(w, eps, shift=shift).astype(dtype)
            rec = tr_reconstruct(tr)
            for stride in (1, 2):
                for padding in (0, 1):
                    g = ConvGeometry(stride, padding)
                    ref = conv2d_direct(as_tensor(x), rec, g)
                    got, _ = tr_convolution(x, TRConvLayer(tr, g))
                    denom = float(np.linalg.norm(ref.data.astype(np.float64)))
                    diff = float(np.linalg.norm(
                        got.data.astype(np.float64) - ref.data.astype(np.float64)))
                    err = diff / denom if denom else diff
                    ok = err <= tol and bound_ok and optimal
                    failures += 0 if ok else 1
                    cells.append({
                        "eps": eps, "shift": shift, "stride": stride,
                        "padding": padding, "pipeline_rel_error": err,
                        "bound_ok": bound_ok, "optimal": optimal, "pass": ok,
                    })
    _emit({
        "dtype": args.dtype,
        "tolerance": tol,
        "cells": cells,
        "failures": failures,
    })
    return EXIT_OK if failures == 0 else EXIT_VERIFY


# ---------------------------------------------------------------------------
# stats


def _regime(shift: int, first_rank: int, dims: tuple[int, int, int, int]) -> str:
    top = dims[shift % 4]
    if first_rank == 1:
        return "1"
    if first_rank == top:
        return "full"
    return "mid"


def _cmd_stats(args) -> int:
    net = _resolve_network(args)
    if args.weights:
        weights = tarc.load_archive(args.weights)
    else:
        weights = network.synthetic_weights(net, seed=args.seed, dtype=_DTYPES[args.dtype])
    counts: dict[tuple[int, str], int] = {}
    layers = 0
    for layer in net.layers:
        if layer.kind != "conv" or not layer.compress:
            continue
        if layer.kernel_h == 1 and layer.kernel_w == 1 and not args.include_1x1:
            continue
        if layer.name not in weights:
            raise TensorRingError(f"archive is missing tensor {layer.name!r}")
        res = min_storage_search(weights[layer.name], args.eps, threads=args.threads)
        key = (res.shift, _regime(res.shift, res.first_rank, weights[layer.name].dims))
        counts[key] = counts.get(key, 0) + 1
        layers += 1
    histogram = [
        {"shift": shift, "first_rank_regime": regime, "count": count}
        for (shift, regime), count in sorted(counts.items())
    ]
    _emit({"network": net.name, "eps": args.eps, "layers": layers,
           "histogram": histogram})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="tensorring",
                     description="Ring-factorized compression of conv kernels.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="factorize one 4-way kernel")
    p.add_argument("--weights", help="TARC archive holding the kernel")
    p.add_argument("--tensor", help="tensor name inside the archive")
    p.add_argument("--synthetic", metavar="T,C,D1,D2",
                   help="generate a seeded Gaussian kernel instead of reading one")
    p.add_argument("--out", help="write the cores as a TARC archive")
    _add_common(p, "eps", "seed", "dtype", "threads", "time")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("compress", help="compress a whole network archive")
    p.add_argument("--network", help=f"built-in name ({', '.join(network.BUILTIN_NETWORKS)})")
    p.add_argument("--spec", help="network description JSON")
    p.add_argument("--weights", help="TARC archive of kernels (synthetic if omitted)")
    p.add_argument("--out", help="write the compressed TARC archive")
    p.add_argument("--emit-spec", help="write the resolved network description JSON")
    p.add_argument("--include-1x1", action="store_true",
                   help="also factorize 1x1 kernels (excluded by default)")
    p.add_argument("--format", choices=("json", "table"), default="json")
    _add_common(p, "eps", "seed", "dtype", "threads", "time")
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("curves", help="storage-bound curves as CSV")
    p.add_argument("T", type=int, help="output channels")
    p.add_argument("C", type=int, help="input channels")
    p.add_argument("D", type=int, help="square kernel size")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("rho", help="pipeline-vs-tensorized FLOPS ratio sweep")
    p.add_argument("--max-rank", type=int, default=30)
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(func=_cmd_rho)

    p = sub.add_parser("verify", help="self-check: pipeline vs direct convolution")
    p.add_argument("--eps", default="0,0.3", help="comma-separated eps values")
    p.add_argument("--inject", choices=("rank-chain",),
                   help="corrupt an invariant on purpose and report the catch")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dtype", choices=sorted(_DTYPES), default="f64")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("stats", help="histogram of selected (shift, first-rank regime)")
    p.add_argument("--network", help="built-in name")
    p.add_argument("--spec", help="network description JSON")
    p.add_argument("--weights", help="TARC archive (synthetic if omitted)")
    p.add_argument("--include-1x1", action="store_true")
    _add_common(p, "eps", "seed", "dtype", "threads")
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if hasattr(args, "eps") and isinstance(args.eps, float):
            _check_eps(parser, args.eps)
        if hasattr(args, "seed"):
            _check_seed(parser, args.seed)
        if args.subcommand == "decompose":
            if bool(args.synthetic) == bool(args.weights):
                parser.error("decompose needs exactly one of --synthetic or --weights")
            if args.weights and not args.tensor:
                parser.error("--weights requires --tensor")
        if args.subcommand in ("compress", "stats"):
            if bool(getattr(args, "network", None)) == bool(getattr(args, "spec", None)):
                parser.error(f"{args.subcommand} needs exactly one of --network or --spec")
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TensorRingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
