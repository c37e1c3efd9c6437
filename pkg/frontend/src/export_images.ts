/** Image-side export: one `.pfeb` row per image file in a directory. */

import { readFile, readdir, stat, writeFile } from "node:fs/promises";
import { join, relative, sep } from "node:path";

import { Embedder } from "./embedder.js";
import { writePfeb } from "./pfeb.js";

export interface ImageExportJob {
  srcDir: string;
  out: string;
  embedder: Embedder;
  labelsCsv?: string;
  /** file extensions to include; everything when empty */
  extensions?: string[];
}

export interface ImageExportResult {
  rows: number;
  skipped: { path: string; reason: string }[];
  out: string;
}

/** Stable listing: recursive, sorted by relative path. */
export async function listImages(srcDir: string, extensions?: string[]): Promise<string[]> {
  const found: string[] = [];
  async function walk(dir: string): Promise<void> {
    const entries = await readdir(dir, { withFileTypes: true });
    for (const entry of entries) {
      const full = join(dir, entry.name);
      if (entry.isDirectory()) {
        await walk(full);
      } else {
        const keep =
          !extensions?.length ||
          extensions.some((ext) => entry.name.toLowerCase().endsWith(ext.toLowerCase()));
        if (keep) found.push(full);
      }
    }
  }
  await walk(srcDir);
  return found
    .map((p) => relative(srcDir, p).split(sep).join("/"))
    .sort();
}

async function readLabelsCsv(path: string): Promise<Map<string, number>> {
  const text = await readFile(path, "utf8");
  const labels = new Map<string, number>();
  for (const [lineNo, rawLine] of text.split(/\r?\n/).entries()) {
    const line = rawLine.trim();
    if (line === "") continue;
    const comma = line.lastIndexOf(",");
    if (comma < 0) throw new Error(`${path}:${lineNo + 1}: expected "id,label"`);
    const id = line.slice(0, comma).trim();
    const value = Number(line.slice(comma + 1).trim());
    if (Number.isNaN(value)) {
      if (lineNo === 0) continue; // header row
      throw new Error(`${path}:${lineNo + 1}: label is not a number`);
    }
    labels.set(id, value);
  }
  return labels;
}

export async function exportImages(job: ImageExportJob): Promise<ImageExportResult> {
  const ids = await listImages(job.srcDir, job.extensions);
  if (ids.length === 0) throw new Error(`no image files under ${job.srcDir}`);
  const labelMap = job.labelsCsv ? await readLabelsCsv(job.labelsCsv) : null;

  const rows: Float32Array[] = [];
  const keptIds: string[] = [];
  const skipped: { path: string; reason: string }[] = [];
  for (const id of ids) {
    try {
      rows.push(await job.embedder.embedImage(join(job.srcDir, id)));
      keptIds.push(id);
    } catch (err) {
      skipped.push({ path: id, reason: (err as Error).message });
      console.warn(`skipping ${id}: ${(err as Error).message}`);
    }
  }
  if (rows.length === 0) throw new Error("every image failed to embed");

  let labels: number[] | undefined;
  if (labelMap) {
    const missing = keptIds.filter((id) => !labelMap.has(id));
    if (missing.length > 0) {
      throw new Error(`labels CSV is missing entries for: ${missing.slice(0, 5).join(", ")}`);
    }
    labels = keptIds.map((id) => labelMap.get(id)!);
  }

  await writePfeb(job.out, { rows, labels, ids: keptIds });
  if (skipped.length > 0) {
    await writeFile(job.out + ".skipped.json", JSON.stringify(skipped, null, 2) + "\n");
  }
  await writeProvenance(job.out, job.embedder);
  return { rows: rows.length, skipped, out: job.out };
}

export async function writeProvenance(out: string, embedder: Embedder): Promise<void> {
  let libraryVersion = "none";
  try {
    const transformers: any = await import("@xenova/transformers");
    libraryVersion = transformers.env?.version ?? "unknown";
  } catch {
    // hash backend: no model library involved
  }
  const provenance = {
    model: embedder.name,
    library: "@xenova/transformers",
    libraryVersion,
    format: "pfeb/1",
  };
  await writeFile(out + ".provenance.json", JSON.stringify(provenance, null, 2) + "\n");
}
