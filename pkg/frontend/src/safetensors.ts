/** Reader for the safetensors checkpoint format.
 *
 * A file is a u64 little-endian header length, a JSON header mapping each
 * tensor name to { dtype, shape, data_offsets }, then one flat data
 * section. Offsets are relative to the start of the data section. Only the
 * two float widths the archive format carries are materialized; any other
 * dtype surfaces as UnsupportedDtypeError when (and only when) that key is
 * actually requested, so checkpoints may carry extra state.
 */

import { CheckpointError, UnsupportedDtypeError } from "./errors";
import { Dtype, bytesToArray, elementCount, makeTensor } from "./tensor";
import { Checkpoint, CheckpointEntry } from "./checkpoint";

const FLOAT_DTYPES: Record<string, Dtype> = { F32: "f32", F64: "f64" };

const KNOWN_WIDTHS: Record<string, number> = {
  F64: 8, F32: 4, F16: 2, BF16: 2,
  I64: 8, I32: 4, I16: 2, I8: 1, U8: 1, BOOL: 1,
};

interface HeaderEntry {
  dtype: string;
  shape: number[];
  data_offsets: [number, number];
}

export function parseSafetensors(buf: Buffer): Checkpoint {
  if (buf.length < 8) {
    throw new CheckpointError("safetensors file too short for header length");
  }
  const headerLen = buf.readBigUInt64LE(0);
  if (headerLen > BigInt(buf.length - 8)) {
    throw new CheckpointError("safetensors header length exceeds file size");
  }
  const headerEnd = 8 + Number(headerLen);
  let header: Record<string, unknown>;
  try {
    header = JSON.parse(buf.subarray(8, headerEnd).toString("utf-8"));
  } catch (err) {
    throw new CheckpointError(`safetensors header is not valid JSON: ${err}`);
  }
  const dataStart = headerEnd;
  const dataLen = buf.length - dataStart;

  const entries = new Map<string, CheckpointEntry>();
  for (const [key, raw] of Object.entries(header)) {
    if (key === "__metadata__") continue;
    const info = raw as HeaderEntry;
    const [begin, end] = info.data_offsets;
    if (!(begin >= 0 && begin <= end && end <= dataLen)) {
      throw new CheckpointError(`data offsets out of range for key '${key}'`);
    }
    const width = KNOWN_WIDTHS[info.dtype];
    if (width !== undefined && end - begin !== elementCount(info.shape) * width) {
      throw new CheckpointError(`payload size does not match shape for key '${key}'`);
    }
    entries.set(key, {
      shape: [...info.shape],
      sourceDtype: info.dtype,
      tensor: () => {
        const dtype = FLOAT_DTYPES[info.dtype];
        if (dtype === undefined) throw new UnsupportedDtypeError(key, info.dtype);
        const count = elementCount(info.shape);
        const bytes = buf.subarray(dataStart + begin, dataStart + end);
        return makeTensor(dtype, info.shape, bytesToArray(dtype, bytes, count));
      },
    });
  }
  return entries;
}
