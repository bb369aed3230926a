import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterAll, describe, expect, it } from "vitest";

import { Checkpoint } from "../src/checkpoint";
import {
  ManifestError,
  MissingKeyError,
  ShapeMismatchError,
  UnsupportedDtypeError,
} from "../src/errors";
import { exportArchive, exportToFile } from "../src/export";
import { loadCheckpoint } from "../src/loader";
import { ExportManifest, loadManifest, validateMapping } from "../src/manifest";
import { NetworkSpec, archiveSlots, loadNetworkSpec } from "../src/netspec";
import { archiveParamCount, readArchiveBytes } from "../src/tarc";
import { Tensor, elementCount, makeTensor, tensorBytes } from "../src/tensor";

const FIXTURES = path.join(__dirname, "fixtures");
const tmpdir = fs.mkdtempSync(path.join(os.tmpdir(), "weight-exporter-"));
afterAll(() => fs.rmSync(tmpdir, { recursive: true, force: true }));

const tinySpec = () => loadNetworkSpec(path.join(FIXTURES, "tiny.json"));
const singleCkpt = () => loadCheckpoint(path.join(FIXTURES, "single16.safetensors"));

function tinyManifest(overrides: Partial<ExportManifest> = {}): ExportManifest {
  return {
    source: path.join(FIXTURES, "single16.safetensors"),
    network: "tiny",
    spec: path.join(FIXTURES, "tiny.json"),
    mapping: { "features.0.weight": "conv" },
    dtype: "preserve",
    ...overrides,
  };
}

describe("single-tensor export", () => {
  it("copies values bit for bit", () => {
    const ckpt = singleCkpt();
    const result = exportArchive(tinyManifest(), tinySpec(), ckpt);
    expect([...result.tensors.keys()]).toEqual(["conv"]);
    const out = result.tensors.get("conv")!;
    const src = ckpt.get("features.0.weight")!.tensor();
    expect(out.dtype).toBe("f32");
    expect(Buffer.compare(tensorBytes(out), tensorBytes(src))).toBe(0);
    expect(result.paramTotal).toBe(16 * 16 * 3 * 3);
  });

  it("produces bytes identical to the Python toolkit's writer", () => {
    const result = exportArchive(tinyManifest(), tinySpec(), singleCkpt());
    const golden = fs.readFileSync(path.join(FIXTURES, "golden.tarc"));
    expect(result.bytes.equals(golden)).toBe(true);
  });

  it("survives a round trip through its own reader", () => {
    const result = exportArchive(tinyManifest(), tinySpec(), singleCkpt());
    const back = readArchiveBytes(result.bytes);
    expect(back.get("conv")!.dims).toEqual([16, 16, 3, 3]);
  });
});

describe("dtype policy", () => {
  it("widens binary32 to binary64 exactly", () => {
    const ckpt = singleCkpt();
    const result = exportArchive(tinyManifest({ dtype: "f64" }), tinySpec(), ckpt);
    const out = result.tensors.get("conv")!;
    const src = ckpt.get("features.0.weight")!.tensor();
    expect(out.dtype).toBe("f64");
    for (let i = 0; i < src.data.length; i++) {
      // every binary32 value is exactly representable in binary64
      expect(out.data[i]).toBe(src.data[i]);
      expect(Math.fround(out.data[i])).toBe(out.data[i]);
    }
  });

  it("refuses to narrow binary64 sources", () => {
    const spec: NetworkSpec = {
      name: "head",
      input: [1, 1, 16],
      layers: [{ name: "fc", kind: "fc", in: 16, out: 16, compress: false }],
    };
    const manifest = tinyManifest({
      network: "head",
      mapping: { "features.0.gamma": "fc/bias" },
      dtype: "f32",
    });
    expect(() => exportArchive(manifest, spec, singleCkpt())).toThrow(
      /features\.0\.gamma.*narrowing/,
    );
  });
});

describe("export errors", () => {
  it("names a missing checkpoint key", () => {
    const manifest = tinyManifest({ mapping: { "nope.weight": "conv" } });
    const run = () => exportArchive(manifest, tinySpec(), singleCkpt());
    expect(run).toThrow(MissingKeyError);
    expect(run).toThrow(/'nope\.weight'/);
  });

  it("names the offending key on shape mismatch", () => {
    const manifest = tinyManifest({ mapping: { "features.1.weight": "conv" } });
    const run = () => exportArchive(manifest, tinySpec(), singleCkpt());
    expect(run).toThrow(ShapeMismatchError);
    expect(run).toThrow(/'features\.1\.weight': got \(8, 16, 3, 3\), want \(16, 16, 3, 3\)/);
  });

  it("names the offending key on unsupported dtype", () => {
    const spec: NetworkSpec = {
      name: "head",
      input: [1, 1, 16],
      layers: [{ name: "fc", kind: "fc", in: 16, out: 16, compress: false }],
    };
    const manifest = tinyManifest({
      network: "head",
      mapping: { "features.0.scale": "fc/bias" },
    });
    const run = () => exportArchive(manifest, spec, singleCkpt());
    expect(run).toThrow(UnsupportedDtypeError);
    expect(run).toThrow(/features\.0\.scale/);
  });
});

describe("mapping invariant", () => {
  it("requires every compressible kernel exactly once", () => {
    const spec = tinySpec();
    expect(() => validateMapping(tinyManifest({ mapping: {} }), spec)).toThrow(
      /'conv' is not mapped/,
    );
    expect(() =>
      validateMapping(
        tinyManifest({
          mapping: { "features.0.weight": "conv", "features.1.weight": "conv" },
        }),
        spec,
      ),
    ).toThrow(/mapped twice/);
  });

  it("rejects unknown archive names and network mismatches", () => {
    const spec = tinySpec();
    expect(() =>
      validateMapping(
        tinyManifest({ mapping: { "features.0.weight": "conv", "x": "blah" } }),
        spec,
      ),
    ).toThrow(ManifestError);
    expect(() => validateMapping(tinyManifest({ network: "other" }), spec)).toThrow(
      /targets network 'other'/,
    );
  });
});

describe("resnet20 export", () => {
  const manifestFile = path.join(FIXTURES, "resnet20_manifest.json");
  const outFile = path.join(tmpdir, "r20.tarc");
  const result = exportToFile(manifestFile, outFile);
  const archive = readArchiveBytes(fs.readFileSync(outFile));

  it("covers every compressible layer with the right shape", () => {
    const spec = loadNetworkSpec(path.join(FIXTURES, "resnet20.json"));
    const compressible = [...archiveSlots(spec).values()].filter((s) => s.compressible);
    expect(compressible.length).toBe(18);
    for (const slot of compressible) {
      const t = archive.get(slot.name);
      expect(t, slot.name).toBeDefined();
      expect(t!.dims).toEqual(slot.shape);
    }
  });

  it("names every conv tensor after its network layer", () => {
    const spec = loadNetworkSpec(path.join(FIXTURES, "resnet20.json"));
    const convNames = spec.layers.filter((l) => l.kind === "conv").map((l) => l.name);
    for (const name of convNames) {
      expect(archive.has(name), name).toBe(true);
    }
  });

  it("conserves the parameter total across the conversion", () => {
    const manifest = loadManifest(manifestFile);
    const ckpt = loadCheckpoint(manifest.source);
    let sourceTotal = 0;
    for (const key of Object.keys(manifest.mapping)) {
      sourceTotal += elementCount(ckpt.get(key)!.shape);
    }
    expect(archiveParamCount(archive)).toBe(sourceTotal);
    expect(result.paramTotal).toBe(sourceTotal);
  });

  it("matches the Python toolkit's writer byte for byte", () => {
    const golden = fs.readFileSync(path.join(FIXTURES, "golden_r20.tarc"));
    expect(fs.readFileSync(outFile).equals(golden)).toBe(true);
  });

  it("orders tensors by network layer regardless of manifest order", () => {
    const manifest = loadManifest(manifestFile);
    const reversed = Object.fromEntries(Object.entries(manifest.mapping).reverse());
    const spec = loadNetworkSpec(manifest.spec);
    const ckpt = loadCheckpoint(manifest.source);
    const shuffled = exportArchive({ ...manifest, mapping: reversed }, spec, ckpt);
    expect(shuffled.bytes.equals(fs.readFileSync(outFile))).toBe(true);
  });
});

describe("in-memory checkpoints", () => {
  it("exports entries that never touched a file", () => {
    const values = Float32Array.from({ length: 2304 }, (_, i) => i / 7);
    const ckpt: Checkpoint = new Map([
      [
        "k",
        {
          shape: [16, 16, 3, 3],
          sourceDtype: "F32",
          tensor: (): Tensor => makeTensor("f32", [16, 16, 3, 3], values),
        },
      ],
    ]);
    const result = exportArchive(tinyManifest({ mapping: { k: "conv" } }), tinySpec(), ckpt);
    expect(result.paramTotal).toBe(2304);
    expect(readArchiveBytes(result.bytes).get("conv")!.data).toEqual(values);
  });
});
