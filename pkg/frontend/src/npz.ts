/** Reader for NumPy .npz checkpoints (a zip of .npy members).
 *
 * Handles both stored and deflated members via fflate. Each .npy member is
 * parsed from its own header: magic, format version, then a Python-literal
 * dict carrying descr, fortran_order and shape. Only little-endian float32
 * and float64 payloads are materialized.
 */

import { unzipSync } from "fflate";

import { CheckpointError, UnsupportedDtypeError } from "./errors";
import { Dtype, bytesToArray, elementCount, makeTensor } from "./tensor";
import { Checkpoint, CheckpointEntry } from "./checkpoint";

const NPY_MAGIC = Buffer.from("\x93NUMPY", "latin1");

const FLOAT_DESCRS: Record<string, Dtype> = {
  "<f4": "f32",
  "<f8": "f64",
  // single-byte-element tags carry no byte order
  "|f4": "f32",
  "|f8": "f64",
};

interface NpyHeader {
  descr: string;
  fortranOrder: boolean;
  shape: number[];
  dataOffset: number;
}

function parseNpyHeader(buf: Buffer, key: string): NpyHeader {
  if (buf.length < 10 || !buf.subarray(0, 6).equals(NPY_MAGIC)) {
    throw new CheckpointError(`member '${key}' is not a .npy file (bad magic)`);
  }
  const major = buf.readUInt8(6);
  let headerLen: number;
  let headerStart: number;
  if (major === 1) {
    headerLen = buf.readUInt16LE(8);
    headerStart = 10;
  } else if (major === 2 || major === 3) {
    headerLen = buf.readUInt32LE(8);
    headerStart = 12;
  } else {
    throw new CheckpointError(`member '${key}' has unknown .npy version ${major}`);
  }
  const text = buf.subarray(headerStart, headerStart + headerLen).toString("latin1");

  const descrMatch = text.match(/'descr'\s*:\s*'([^']+)'/);
  const orderMatch = text.match(/'fortran_order'\s*:\s*(True|False)/);
  const shapeMatch = text.match(/'shape'\s*:\s*\(([^)]*)\)/);
  if (!descrMatch || !orderMatch || !shapeMatch) {
    throw new CheckpointError(`member '${key}' has an unparseable .npy header`);
  }
  const shape = shapeMatch[1]
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => {
      const n = Number(s);
      if (!Number.isInteger(n) || n < 0) {
        throw new CheckpointError(`member '${key}' has a bad shape entry '${s}'`);
      }
      return n;
    });
  return {
    descr: descrMatch[1],
    fortranOrder: orderMatch[1] === "True",
    shape,
    dataOffset: headerStart + headerLen,
  };
}

export function parseNpz(buf: Buffer): Checkpoint {
  let members: Record<string, Uint8Array>;
  try {
    members = unzipSync(new Uint8Array(buf.buffer, buf.byteOffset, buf.byteLength));
  } catch (err) {
    throw new CheckpointError(`not a readable .npz archive: ${err}`);
  }
  const entries = new Map<string, CheckpointEntry>();
  for (const [member, bytes] of Object.entries(members)) {
    const key = member.endsWith(".npy") ? member.slice(0, -4) : member;
    const data = Buffer.from(bytes.buffer, bytes.byteOffset, bytes.byteLength);
    const header = parseNpyHeader(data, key);
    entries.set(key, {
      shape: header.shape,
      sourceDtype: header.descr,
      tensor: () => {
        const dtype = FLOAT_DESCRS[header.descr];
        if (dtype === undefined) throw new UnsupportedDtypeError(key, header.descr);
        if (header.fortranOrder) {
          // transposing column-major storage would be a data transformation,
          // not a conversion; refuse instead
          throw new CheckpointError(`member '${key}' is Fortran-ordered, expected row-major`);
        }
        const count = elementCount(header.shape);
        const payload = data.subarray(header.dataOffset);
        if (payload.length !== count * (dtype === "f32" ? 4 : 8)) {
          throw new CheckpointError(`payload size does not match shape for key '${key}'`);
        }
        return makeTensor(dtype, header.shape, bytesToArray(dtype, payload, count));
      },
    });
  }
  return entries;
}
