/** TARC: a tiny byte-exact archive for named dense tensors.
 *
 * Layout (all integers little-endian):
 *
 *     magic   4 bytes  "TARC"
 *     version u32      currently 1
 *     count   u32      number of tensors
 *     then per tensor, in order:
 *         name_len u32
 *         name     name_len bytes, UTF-8
 *         dtype    u8   0 = binary32, 1 = binary64
 *         ndim     u8
 *         dims     ndim x u64
 *         payload  raw row-major values, little-endian
 *
 * Every byte is specified so that independent implementations produce
 * identical files from identical inputs.
 */

import { ArchiveError } from "./errors";
import {
  BYTES_PER_ELEMENT,
  Dtype,
  Tensor,
  bytesToArray,
  elementCount,
  makeTensor,
  tensorBytes,
} from "./tensor";

const MAGIC = Buffer.from("TARC", "ascii");
const VERSION = 1;

const DTYPE_CODES: Record<Dtype, number> = { f32: 0, f64: 1 };
const CODE_DTYPES: Record<number, Dtype> = { 0: "f32", 1: "f64" };

/** Serialize named tensors; iteration order of the map is preserved. */
export function writeArchiveBytes(tensors: Map<string, Tensor>): Buffer {
  const parts: Buffer[] = [MAGIC];
  const head = Buffer.alloc(8);
  head.writeUInt32LE(VERSION, 0);
  head.writeUInt32LE(tensors.size, 4);
  parts.push(head);
  for (const [name, t] of tensors) {
    const nameBytes = Buffer.from(name, "utf-8");
    const header = Buffer.alloc(4 + nameBytes.length + 2 + 8 * t.dims.length);
    let pos = 0;
    header.writeUInt32LE(nameBytes.length, pos);
    pos += 4;
    nameBytes.copy(header, pos);
    pos += nameBytes.length;
    header.writeUInt8(DTYPE_CODES[t.dtype], pos);
    header.writeUInt8(t.dims.length, pos + 1);
    pos += 2;
    for (const dim of t.dims) {
      header.writeBigUInt64LE(BigInt(dim), pos);
      pos += 8;
    }
    parts.push(header, tensorBytes(t));
  }
  return Buffer.concat(parts);
}

/** Parse archive bytes back into named tensors, preserving order. */
export function readArchiveBytes(buf: Buffer): Map<string, Tensor> {
  if (buf.length < 12 || !buf.subarray(0, 4).equals(MAGIC)) {
    throw new ArchiveError("not a TARC archive (bad magic)");
  }
  const version = buf.readUInt32LE(4);
  if (version !== VERSION) {
    throw new ArchiveError(`unsupported archive version ${version}`);
  }
  const count = buf.readUInt32LE(8);
  let pos = 12;
  const out = new Map<string, Tensor>();

  const need = (n: number) => {
    if (pos + n > buf.length) throw new ArchiveError("truncated archive");
  };

  for (let i = 0; i < count; i++) {
    need(4);
    const nameLen = buf.readUInt32LE(pos);
    pos += 4;
    need(nameLen);
    const name = buf.subarray(pos, pos + nameLen).toString("utf-8");
    pos += nameLen;
    need(2);
    const code = buf.readUInt8(pos);
    const ndim = buf.readUInt8(pos + 1);
    pos += 2;
    const dtype = CODE_DTYPES[code];
    if (dtype === undefined) {
      throw new ArchiveError(`unknown dtype code ${code} for tensor '${name}'`);
    }
    need(8 * ndim);
    const dims: number[] = [];
    for (let d = 0; d < ndim; d++) {
      const dim = buf.readBigUInt64LE(pos + 8 * d);
      if (dim > BigInt(Number.MAX_SAFE_INTEGER)) {
        throw new ArchiveError(`dimension overflow for tensor '${name}'`);
      }
      dims.push(Number(dim));
    }
    pos += 8 * ndim;
    const nItems = elementCount(dims);
    const nBytes = nItems * BYTES_PER_ELEMENT[dtype];
    need(nBytes);
    const data = bytesToArray(dtype, buf.subarray(pos, pos + nBytes), nItems);
    pos += nBytes;
    if (out.has(name)) {
      throw new ArchiveError(`duplicate tensor name '${name}'`);
    }
    out.set(name, makeTensor(dtype, dims, data));
  }
  if (pos !== buf.length) {
    throw new ArchiveError(`${buf.length - pos} trailing bytes after last tensor`);
  }
  return out;
}

/** Model parameters stored in an archive: entry count over all tensors
 * except meta descriptors, which are bookkeeping. */
export function archiveParamCount(tensors: Map<string, Tensor>): number {
  let total = 0;
  for (const [name, t] of tensors) {
    if (name === "meta" || name.endsWith("/meta")) continue;
    total += elementCount(t.dims);
  }
  return total;
}
