/**
 * Writer (and verifying reader) for the `.pfeb` embedding file format.
 *
 * Layout, all little-endian:
 *   bytes 0-3  magic "PFEB"
 *   u32        version (1)
 *   u32        n rows
 *   u32        d columns
 *   u32        flags (bit0 = labels, bit1 = ids)
 *   n*d f32    embeddings, row-major
 *   n f32      labels            (if bit0)
 *   n times    u16 length + utf8 (if bit1)
 *
 * The consumer normalizes rows at load time; this writer stores values
 * exactly as given.
 */

import { writeFile, readFile } from "node:fs/promises";

export const PFEB_MAGIC = "PFEB";
export const PFEB_VERSION = 1;

export interface PfebData {
  /** one Float32Array per row, all the same length */
  rows: Float32Array[];
  labels?: number[];
  ids?: string[];
}

export function encodePfeb(data: PfebData): Buffer {
  const n = data.rows.length;
  if (n === 0) throw new Error("refusing to encode an empty dataset (n=0)");
  const d = data.rows[0].length;
  if (d === 0) throw new Error("refusing to encode zero-dimensional rows");
  for (const [i, row] of data.rows.entries()) {
    if (row.length !== d) {
      throw new Error(`row ${i} has ${row.length} values, expected ${d}`);
    }
    for (const v of row) {
      if (!Number.isFinite(v)) throw new Error(`row ${i} contains a non-finite value`);
    }
  }
  if (data.labels && data.labels.length !== n) {
    throw new Error(`labels length ${data.labels.length} does not match n=${n}`);
  }
  if (data.ids && data.ids.length !== n) {
    throw new Error(`ids length ${data.ids.length} does not match n=${n}`);
  }

  let flags = 0;
  if (data.labels) flags |= 1;
  if (data.ids) flags |= 2;

  const chunks: Buffer[] = [];
  const header = Buffer.alloc(20);
  header.write(PFEB_MAGIC, 0, "ascii");
  header.writeUInt32LE(PFEB_VERSION, 4);
  header.writeUInt32LE(n, 8);
  header.writeUInt32LE(d, 12);
  header.writeUInt32LE(flags, 16);
  chunks.push(header);

  const payload = Buffer.alloc(4 * n * d);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < d; j++) {
      payload.writeFloatLE(data.rows[i][j], 4 * (i * d + j));
    }
  }
  chunks.push(payload);

  if (data.labels) {
    const labels = Buffer.alloc(4 * n);
    data.labels.forEach((v, i) => labels.writeFloatLE(v, 4 * i));
    chunks.push(labels);
  }
  if (data.ids) {
    for (const id of data.ids) {
      const encoded = Buffer.from(id, "utf8");
      if (encoded.length > 0xffff) throw new Error(`id too long to encode: ${id}`);
      const len = Buffer.alloc(2);
      len.writeUInt16LE(encoded.length, 0);
      chunks.push(len, encoded);
    }
  }
  return Buffer.concat(chunks);
}

export async function writePfeb(path: string, data: PfebData): Promise<void> {
  await writeFile(path, encodePfeb(data));
}

/** Strict parser used to verify written files and in tests. */
export function decodePfeb(blob: Buffer): Required<Omit<PfebData, "labels" | "ids">> &
  Pick<PfebData, "labels" | "ids"> & { n: number; d: number } {
  if (blob.length < 20) throw new Error("truncated header");
  if (blob.toString("ascii", 0, 4) !== PFEB_MAGIC) throw new Error("bad magic");
  const version = blob.readUInt32LE(4);
  if (version !== PFEB_VERSION) throw new Error(`unsupported version ${version}`);
  const n = blob.readUInt32LE(8);
  const d = blob.readUInt32LE(12);
  const flags = blob.readUInt32LE(16);
  let offset = 20;
  const rows: Float32Array[] = [];
  for (let i = 0; i < n; i++) {
    const row = new Float32Array(d);
    for (let j = 0; j < d; j++) {
      row[j] = blob.readFloatLE(offset);
      offset += 4;
    }
    rows.push(row);
  }
  let labels: number[] | undefined;
  if (flags & 1) {
    labels = [];
    for (let i = 0; i < n; i++) {
      labels.push(blob.readFloatLE(offset));
      offset += 4;
    }
  }
  let ids: string[] | undefined;
  if (flags & 2) {
    ids = [];
    for (let i = 0; i < n; i++) {
      const len = blob.readUInt16LE(offset);
      offset += 2;
      ids.push(blob.toString("utf8", offset, offset + len));
      offset += len;
    }
  }
  if (offset !== blob.length) throw new Error("trailing data after payload");
  return { rows, labels, ids, n, d };
}

export async function readPfeb(path: string) {
  return decodePfeb(await readFile(path));
}
