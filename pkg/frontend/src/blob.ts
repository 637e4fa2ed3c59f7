/**
 * Binary sample-blob codec mirrored from the server.
 *
 * Layout: "JSMP" magic, u16 version, u32 row count, u16 column count
 * (all little-endian), followed by N*D float64 values in row-major
 * order.  Decoding is strict: any structural defect throws.
 */

export const BLOB_MAGIC = "JSMP";
export const BLOB_VERSION = 1;
const HEADER_BYTES = 12;

export type Observability = "observable" | "latent";

export interface VariableSpec {
  name: string;
  observability: Observability;
  unit: string;
}

export class BlobError extends Error {}

export interface SampleMatrix {
  /** row-major values, rows * cols entries */
  values: Float64Array;
  rows: number;
  cols: number;
}

export function decodeBlob(buffer: ArrayBuffer): SampleMatrix {
  if (buffer.byteLength < HEADER_BYTES) {
    throw new BlobError("blob shorter than header");
  }
  const view = new DataView(buffer);
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3));
  if (magic !== BLOB_MAGIC) throw new BlobError("bad magic");
  const version = view.getUint16(4, true);
  if (version !== BLOB_VERSION) {
    throw new BlobError(`unsupported format version ${version}`);
  }
  const rows = view.getUint32(6, true);
  const cols = view.getUint16(10, true);
  const expected = HEADER_BYTES + rows * cols * 8;
  if (buffer.byteLength !== expected) {
    throw new BlobError(`expected ${expected} bytes, got ${buffer.byteLength}`);
  }
  const values = new Float64Array(rows * cols);
  for (let i = 0; i < rows * cols; i++) {
    const v = view.getFloat64(HEADER_BYTES + i * 8, true);
    if (!Number.isFinite(v)) throw new BlobError("non-finite sample value");
    values[i] = v;
  }
  return { values, rows, cols };
}

export function encodeBlob(matrix: SampleMatrix): ArrayBuffer {
  const buffer = new ArrayBuffer(HEADER_BYTES + matrix.rows * matrix.cols * 8);
  const view = new DataView(buffer);
  for (let i = 0; i < 4; i++) view.setUint8(i, BLOB_MAGIC.charCodeAt(i));
  view.setUint16(4, BLOB_VERSION, true);
  view.setUint32(6, matrix.rows, true);
  view.setUint16(10, matrix.cols, true);
  for (let i = 0; i < matrix.values.length; i++) {
    view.setFloat64(HEADER_BYTES + i * 8, matrix.values[i], true);
  }
  return buffer;
}

export function parseSchema(text: string): VariableSpec[] {
  const entries = JSON.parse(text);
  if (!Array.isArray(entries)) throw new BlobError("schema is not a list");
  return entries.map((e: any) => {
    if (typeof e.name !== "string") throw new BlobError("schema entry lacks a name");
    if (e.observability !== "observable" && e.observability !== "latent") {
      throw new BlobError(`bad observability ${e.observability}`);
    }
    return { name: e.name, observability: e.observability, unit: e.unit ?? "" };
  });
}
