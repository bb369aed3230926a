/** Checkpoint to archive conversion. No numerics happen here: values are
 * copied bit-for-bit, with the single exception of the lossless binary32
 * to binary64 widening the dtype policy may request. */

import * as fs from "fs";

import { Checkpoint } from "./checkpoint";
import { CheckpointError, MissingKeyError, ShapeMismatchError } from "./errors";
import { loadCheckpoint } from "./loader";
import { ExportManifest, loadManifest, validateMapping } from "./manifest";
import { NetworkSpec, archiveSlots, loadNetworkSpec } from "./netspec";
import { Tensor, elementCount, upcastToF64 } from "./tensor";
import { archiveParamCount, writeArchiveBytes } from "./tarc";

export interface ExportResult {
  /** Archive tensors in network layer order. */
  tensors: Map<string, Tensor>;
  /** Serialized archive, ready to write. */
  bytes: Buffer;
  /** Parameter total, equal on both sides of the conversion. */
  paramTotal: number;
}

function applyPolicy(t: Tensor, policy: ExportManifest["dtype"], key: string): Tensor {
  if (policy === "preserve") return t;
  if (policy === "f64") return upcastToF64(t);
  if (t.dtype !== "f32") {
    throw new CheckpointError(
      `dtype policy f32 cannot represent key '${key}': source is ${t.dtype} and narrowing drops bits`,
    );
  }
  return t;
}

/** Convert the mapped checkpoint tensors into archive form.
 *
 * Output order follows the network description, not the manifest, so two
 * manifests that differ only in JSON key order produce identical bytes.
 */
export function exportArchive(
  manifest: ExportManifest,
  spec: NetworkSpec,
  checkpoint: Checkpoint,
): ExportResult {
  validateMapping(manifest, spec);
  const sourceByTarget = new Map<string, string>();
  for (const [key, target] of Object.entries(manifest.mapping)) {
    sourceByTarget.set(target, key);
  }

  const tensors = new Map<string, Tensor>();
  let sourceTotal = 0;
  for (const slot of archiveSlots(spec).values()) {
    const key = sourceByTarget.get(slot.name);
    if (key === undefined) continue;
    const entry = checkpoint.get(key);
    if (entry === undefined) throw new MissingKeyError(key);
    if (
      entry.shape.length !== slot.shape.length ||
      entry.shape.some((d, i) => d !== slot.shape[i])
    ) {
      throw new ShapeMismatchError(key, entry.shape, slot.shape);
    }
    sourceTotal += elementCount(entry.shape);
    tensors.set(slot.name, applyPolicy(entry.tensor(), manifest.dtype, key));
  }

  const paramTotal = archiveParamCount(tensors);
  if (paramTotal !== sourceTotal) {
    throw new CheckpointError(
      `parameter total changed during export: ${sourceTotal} in, ${paramTotal} out`,
    );
  }
  return { tensors, bytes: writeArchiveBytes(tensors), paramTotal };
}

/** File-level wrapper: read manifest, checkpoint and network description,
 * convert, and write the archive. */
export function exportToFile(manifestFile: string, outFile: string): ExportResult {
  const manifest = loadManifest(manifestFile);
  const spec = loadNetworkSpec(manifest.spec);
  const checkpoint = loadCheckpoint(manifest.source);
  const result = exportArchive(manifest, spec, checkpoint);
  fs.writeFileSync(outFile, result.bytes);
  return result;
}
