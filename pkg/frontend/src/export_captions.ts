/** Caption-side export: instantiated templates -> manifest + `.pfeb`. */

import { mkdir, writeFile } from "node:fs/promises";
import { join } from "node:path";

import { Embedder } from "./embedder.js";
import { writePfeb } from "./pfeb.js";
import { writeProvenance } from "./export_images.js";
import { assertTemplate, instantiate, templateSlug } from "./values.js";

export interface CaptionExportJob {
  templates: string[];
  /** regression: numeric label values (strictly increasing) */
  values?: number[];
  /** classification: class names; values become indices 0..m-1 */
  classNames?: string[];
  outDir: string;
  embedder: Embedder;
}

export interface CaptionExportResult {
  manifests: string[];
}

export async function exportCaptions(job: CaptionExportJob): Promise<CaptionExportResult> {
  if (job.templates.length === 0) throw new Error("need at least one template");
  job.templates.forEach(assertTemplate);
  const regression = job.values !== undefined;
  if (regression === (job.classNames !== undefined)) {
    throw new Error("provide exactly one of numeric values or class names");
  }
  const labels: (string | number)[] = regression ? job.values! : job.classNames!;
  if (labels.length === 0) throw new Error("empty label value list");
  if (regression) {
    for (let i = 1; i < job.values!.length; i++) {
      if (!(job.values![i] > job.values![i - 1])) {
        throw new Error("regression values must be strictly increasing");
      }
    }
  }

  const manifests: string[] = [];
  for (const template of job.templates) {
    const dir = join(job.outDir, templateSlug(template));
    await mkdir(dir, { recursive: true });
    const names = labels.map((label) => instantiate(template, label));
    const rows: Float32Array[] = [];
    for (const name of names) {
      rows.push(await job.embedder.embedText(name));
    }
    const pfebPath = join(dir, "captions.pfeb");
    await writePfeb(pfebPath, { rows });
    const manifest = {
      embeddings: "captions.pfeb",
      names,
      values: regression ? job.values! : labels.map((_, i) => i),
      task: regression ? "regression" : "classification",
      template,
    };
    const manifestPath = join(dir, "manifest.json");
    await writeFile(manifestPath, JSON.stringify(manifest, null, 2) + "\n");
    await writeProvenance(pfebPath, job.embedder);
    manifests.push(manifestPath);
  }
  return { manifests };
}
