/** In-memory dense tensor: row-major typed array plus dims. */

export type Dtype = "f32" | "f64";

export interface Tensor {
  dtype: Dtype;
  dims: number[];
  /** Row-major values; length equals elementCount(dims). */
  data: Float32Array | Float64Array;
}

export const BYTES_PER_ELEMENT: Record<Dtype, number> = { f32: 4, f64: 8 };

export function elementCount(dims: number[]): number {
  // scalar (ndim 0) still stores one value
  return dims.reduce((a, b) => a * b, 1);
}

export function makeTensor(
  dtype: Dtype,
  dims: number[],
  data: Float32Array | Float64Array,
): Tensor {
  if (data.length !== elementCount(dims)) {
    throw new RangeError(
      `data length ${data.length} does not match dims (${dims.join(", ")})`,
    );
  }
  return { dtype, dims: [...dims], data };
}

const LITTLE_ENDIAN = (() => {
  const probe = new Uint8Array(new Uint16Array([1]).buffer);
  return probe[0] === 1;
})();

/** Raw little-endian bytes of the values, independent of host order. */
export function tensorBytes(t: Tensor): Buffer {
  const itemBytes = BYTES_PER_ELEMENT[t.dtype];
  if (LITTLE_ENDIAN) {
    return Buffer.from(t.data.buffer, t.data.byteOffset, t.data.length * itemBytes);
  }
  const out = Buffer.alloc(t.data.length * itemBytes);
  const view = new DataView(out.buffer, out.byteOffset, out.byteLength);
  for (let i = 0; i < t.data.length; i++) {
    if (t.dtype === "f32") view.setFloat32(i * 4, t.data[i], true);
    else view.setFloat64(i * 8, t.data[i], true);
  }
  return out;
}

/** Decode little-endian value bytes into a fresh, aligned typed array. */
export function bytesToArray(
  dtype: Dtype,
  bytes: Uint8Array,
  count: number,
): Float32Array | Float64Array {
  const itemBytes = BYTES_PER_ELEMENT[dtype];
  if (bytes.length !== count * itemBytes) {
    throw new RangeError(`expected ${count * itemBytes} bytes, got ${bytes.length}`);
  }
  // copy to a fresh buffer: source views may be unaligned, and the result
  // must not alias the input
  const copy = new Uint8Array(count * itemBytes);
  copy.set(bytes);
  const arr = dtype === "f32" ? new Float32Array(copy.buffer) : new Float64Array(copy.buffer);
  if (!LITTLE_ENDIAN) {
    const view = new DataView(copy.buffer);
    for (let i = 0; i < count; i++) {
      arr[i] = dtype === "f32" ? view.getFloat32(i * 4, true) : view.getFloat64(i * 8, true);
    }
  }
  return arr;
}

/** Widen binary32 values to binary64; every binary32 value is exactly
 * representable, so this cast is lossless. */
export function upcastToF64(t: Tensor): Tensor {
  if (t.dtype === "f64") return t;
  return makeTensor("f64", t.dims, Float64Array.from(t.data));
}
