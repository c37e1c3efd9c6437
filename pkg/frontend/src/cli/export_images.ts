#!/usr/bin/env node
/**
 * export_images --src <dir> --model vitb32 --out imgs.pfeb [--labels labels.csv]
 *
 * Models: vitb32 (CLIP ViT-B/32 via @xenova/transformers),
 * clip:<hf-model-id>, or hash:<dim> (deterministic offline backend).
 */

import { resolveEmbedder } from "../embedder.js";
import { exportImages } from "../export_images.js";
import { one, parseArgs, required } from "./args.js";

async function main(): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs(process.argv.slice(2), ["src", "model", "out", "labels", "ext"]);
  } catch (err) {
    console.error(`export_images: ${(err as Error).message}`);
    return 1;
  }
  try {
    const embedder = resolveEmbedder(one(parsed, "model") ?? "vitb32");
    const extensions = one(parsed, "ext")?.split(",");
    const result = await exportImages({
      srcDir: required(parsed, "src"),
      out: required(parsed, "out"),
      labelsCsv: one(parsed, "labels"),
      embedder,
      extensions,
    });
    console.error(
      `wrote ${result.rows} rows -> ${result.out}` +
        (result.skipped.length ? ` (${result.skipped.length} skipped)` : ""),
    );
    return 0;
  } catch (err) {
    console.error(`export_images: ${(err as Error).message}`);
    return 2;
  }
}

main().then((code) => {
  process.exitCode = code;
});
