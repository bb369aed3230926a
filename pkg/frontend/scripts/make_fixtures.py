#!/usr/bin/env python3
"""Regenerate the binary test fixtures under test/fixtures.

Everything here is deterministic (fixed RNG seeds), so reruns leave git
clean. The golden archives are produced by the Python toolkit so the tests
can assert cross-implementation byte identity; the checkpoints are composed
with numpy alone.
"""

import json
import struct
import subprocess
import sys
from pathlib import Path

import numpy as np

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"

SAFETENSORS_TAGS = {
    np.dtype("<f2"): "F16",
    np.dtype("<f4"): "F32",
    np.dtype("<f8"): "F64",
}


def write_safetensors(path: Path, tensors: dict[str, np.ndarray]) -> None:
    header: dict[str, dict] = {}
    chunks = []
    offset = 0
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        raw = arr.astype(arr.dtype.newbyteorder("<")).tobytes()
        header[name] = {
            "dtype": SAFETENSORS_TAGS[np.dtype(arr.dtype.str)],
            "shape": list(arr.shape),
            "data_offsets": [offset, offset + len(raw)],
        }
        chunks.append(raw)
        offset += len(raw)
    blob = json.dumps(header).encode("utf-8")
    with path.open("wb") as fh:
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for raw in chunks:
            fh.write(raw)


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(2024)

    # network descriptions: resnet20 straight from the toolkit CLI, plus a
    # one-layer network for the small round-trip cases
    subprocess.run(
        [sys.executable, "-m", "tensorring", "compress", "--network", "resnet20",
         "--eps", "0.5", "--seed", "0", "--emit-spec", str(FIXTURES / "resnet20.json")],
        check=True, capture_output=True,
    )
    tiny = {
        "name": "tiny",
        "input": [8, 8, 16],
        "layers": [
            {"name": "conv", "kind": "conv", "T": 16, "C": 16, "D1": 3, "D2": 3,
             "stride": 1, "padding": 1, "compress": True},
        ],
    }
    (FIXTURES / "tiny.json").write_text(json.dumps(tiny, indent=2) + "\n")

    # safetensors checkpoint: the mappable kernel, a wrong-shape kernel for
    # the negative test, a binary64 tensor, and a half-precision tensor that
    # must be rejected if ever mapped
    kernel = rng.standard_normal((16, 16, 3, 3)).astype(np.float32)
    wrong = rng.standard_normal((8, 16, 3, 3)).astype(np.float32)
    gamma = rng.standard_normal(16).astype(np.float64)
    half = rng.standard_normal(16).astype(np.float16)
    write_safetensors(FIXTURES / "single16.safetensors", {
        "features.0.weight": kernel,
        "features.1.weight": wrong,
        "features.0.gamma": gamma,
        "features.0.scale": half,
    })

    from tensorring.archive import save_archive

    save_archive(FIXTURES / "golden.tarc", {"conv": kernel})

    # resnet20-style checkpoint in npz form, one tensor per conv kernel plus
    # the classifier head, keyed the way training frameworks name them
    spec = json.loads((FIXTURES / "resnet20.json").read_text())
    arrays: dict[str, np.ndarray] = {}
    golden: dict[str, np.ndarray] = {}
    mapping: dict[str, str] = {}
    for layer in spec["layers"]:
        if layer["kind"] == "conv":
            arr = rng.standard_normal(
                (layer["T"], layer["C"], layer["D1"], layer["D2"])).astype(np.float32)
            arrays[f"{layer['name']}.weight"] = arr
            golden[layer["name"]] = arr
            mapping[f"{layer['name']}.weight"] = layer["name"]
        else:
            w = rng.standard_normal((layer["out"], layer["in"])).astype(np.float32)
            b = rng.standard_normal(layer["out"]).astype(np.float32)
            arrays[f"{layer['name']}.weight"] = w
            arrays[f"{layer['name']}.bias"] = b
            golden[f"{layer['name']}/weight"] = w
            golden[f"{layer['name']}/bias"] = b
            mapping[f"{layer['name']}.weight"] = f"{layer['name']}/weight"
            mapping[f"{layer['name']}.bias"] = f"{layer['name']}/bias"
    np.savez_compressed(FIXTURES / "resnet20_ckpt.npz", **arrays)
    save_archive(FIXTURES / "golden_r20.tarc", golden)
    (FIXTURES / "resnet20_manifest.json").write_text(json.dumps({
        "source": "resnet20_ckpt.npz",
        "network": "resnet20",
        "spec": "resnet20.json",
        "mapping": mapping,
    }, indent=2) + "\n")

    # small uncompressed npz to cover the stored (non-deflate) zip path
    np.savez(FIXTURES / "stored.npz",
             w=np.arange(6, dtype=np.float32).reshape(2, 3),
             b=np.linspace(-1.0, 1.0, 4, dtype=np.float64))

    (FIXTURES / "single16_manifest.json").write_text(json.dumps({
        "source": "single16.safetensors",
        "network": "tiny",
        "spec": "tiny.json",
        "mapping": {"features.0.weight": "conv"},
    }, indent=2) + "\n")

    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
