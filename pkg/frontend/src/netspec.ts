/** Network description JSON as emitted by the compression toolkit
 * (`--emit-spec`). The exporter never invents layer names or shapes; both
 * come from this document. */

import * as fs from "fs";

import { z } from "zod";

const count = z.number().int().positive();

const convLayerSchema = z.object({
  name: z.string().min(1),
  kind: z.literal("conv"),
  T: count,
  C: count,
  D1: count,
  D2: count,
  stride: count,
  padding: z.number().int().nonnegative(),
  compress: z.boolean(),
});

const fcLayerSchema = z.object({
  name: z.string().min(1),
  kind: z.literal("fc"),
  in: count,
  out: count,
  compress: z.boolean(),
});

const networkSpecSchema = z.object({
  name: z.string().min(1),
  input: z.array(count).length(3),
  layers: z.array(z.discriminatedUnion("kind", [convLayerSchema, fcLayerSchema])),
});

export type ConvLayer = z.infer<typeof convLayerSchema>;
export type FcLayer = z.infer<typeof fcLayerSchema>;
export type NetworkSpec = z.infer<typeof networkSpecSchema>;

export function parseNetworkSpec(json: unknown, source: string): NetworkSpec {
  const parsed = networkSpecSchema.safeParse(json);
  if (!parsed.success) {
    throw new Error(`invalid network description in ${source}: ${parsed.error.message}`);
  }
  return parsed.data;
}

export function loadNetworkSpec(file: string): NetworkSpec {
  return parseNetworkSpec(JSON.parse(fs.readFileSync(file, "utf-8")), file);
}

/** One tensor slot the archive layout understands. */
export interface ArchiveSlot {
  name: string;
  shape: number[];
  /** Kernel of a layer marked for factorization. */
  compressible: boolean;
}

/** Every archive tensor name the network can reference, in layer order:
 * conv kernel then its batch-norm rows, fc weight then bias. */
export function archiveSlots(spec: NetworkSpec): Map<string, ArchiveSlot> {
  const slots = new Map<string, ArchiveSlot>();
  for (const layer of spec.layers) {
    if (layer.kind === "conv") {
      slots.set(layer.name, {
        name: layer.name,
        shape: [layer.T, layer.C, layer.D1, layer.D2],
        compressible: layer.compress,
      });
      slots.set(`${layer.name}/bn`, {
        name: `${layer.name}/bn`,
        shape: [2, layer.T],
        compressible: false,
      });
    } else {
      slots.set(`${layer.name}/weight`, {
        name: `${layer.name}/weight`,
        shape: [layer.out, layer.in],
        compressible: false,
      });
      slots.set(`${layer.name}/bias`, {
        name: `${layer.name}/bias`,
        shape: [layer.out],
        compressible: false,
      });
    }
  }
  return slots;
}
