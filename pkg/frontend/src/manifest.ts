/** Export manifest: which checkpoint feeds which network, and how its keys
 * map onto archive tensor names. */

import * as fs from "fs";
import * as path from "path";

import { z } from "zod";

import { ManifestError } from "./errors";
import { NetworkSpec, archiveSlots } from "./netspec";

const manifestSchema = z.object({
  /** Checkpoint path, resolved relative to the manifest file. */
  source: z.string().min(1),
  /** Network name; must match the network description document. */
  network: z.string().min(1),
  /** Path to the network description JSON, resolved like source. */
  spec: z.string().min(1),
  /** Checkpoint key to archive tensor name, one to one. */
  mapping: z.record(z.string(), z.string().min(1)),
  /** preserve keeps source widths; f64 widens binary32 losslessly; f32
   * requires binary32 sources (narrowing would drop bits). */
  dtype: z.enum(["preserve", "f32", "f64"]).default("preserve"),
});

export type DtypePolicy = "preserve" | "f32" | "f64";
export type ExportManifest = z.infer<typeof manifestSchema>;

export function parseManifest(json: unknown, source: string): ExportManifest {
  const parsed = manifestSchema.safeParse(json);
  if (!parsed.success) {
    throw new ManifestError(`invalid manifest in ${source}: ${parsed.error.message}`);
  }
  return parsed.data;
}

/** Load a manifest and rewrite its relative paths against its own directory. */
export function loadManifest(file: string): ExportManifest {
  const manifest = parseManifest(JSON.parse(fs.readFileSync(file, "utf-8")), file);
  const base = path.dirname(path.resolve(file));
  return {
    ...manifest,
    source: path.resolve(base, manifest.source),
    spec: path.resolve(base, manifest.spec),
  };
}

/** Check the mapping against the network: names must resolve to archive
 * slots, no slot may be fed twice, and every compressible kernel must be
 * covered exactly once. */
export function validateMapping(manifest: ExportManifest, spec: NetworkSpec): void {
  if (spec.name !== manifest.network) {
    throw new ManifestError(
      `manifest targets network '${manifest.network}' but the description is for '${spec.name}'`,
    );
  }
  const slots = archiveSlots(spec);
  const seen = new Map<string, string>();
  for (const [key, target] of Object.entries(manifest.mapping)) {
    if (!slots.has(target)) {
      throw new ManifestError(
        `checkpoint key '${key}' maps to unknown archive name '${target}'`,
      );
    }
    const prior = seen.get(target);
    if (prior !== undefined) {
      throw new ManifestError(
        `archive name '${target}' is mapped twice, by '${prior}' and '${key}'`,
      );
    }
    seen.set(target, key);
  }
  for (const slot of slots.values()) {
    if (slot.compressible && !seen.has(slot.name)) {
      throw new ManifestError(`compressible layer '${slot.name}' is not mapped`);
    }
  }
}
