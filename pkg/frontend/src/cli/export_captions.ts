#!/usr/bin/env node
/**
 * export_captions --template "a person of age [label]." --values 1..100 --out caps/
 * export_captions --template "a photo of a [label]." --names airplane,automobile,... --out caps/
 *
 * --template may repeat: one manifest directory is emitted per template,
 * ready for prompt ranking on the consumer side.
 */

import { resolveEmbedder } from "../embedder.js";
import { exportCaptions } from "../export_captions.js";
import { parseValueSpec } from "../values.js";
import { one, parseArgs, required } from "./args.js";

async function main(): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs(process.argv.slice(2), ["template", "values", "names", "out", "model"]);
  } catch (err) {
    console.error(`export_captions: ${(err as Error).message}`);
    return 1;
  }
  try {
    const templates = parsed.flags.get("template") ?? [];
    if (templates.length === 0) throw new Error("missing required flag --template");
    const valueSpec = one(parsed, "values");
    const nameSpec = one(parsed, "names");
    const embedder = resolveEmbedder(one(parsed, "model") ?? "vitb32");
    const result = await exportCaptions({
      templates,
      values: valueSpec !== undefined ? parseValueSpec(valueSpec) : undefined,
      classNames: nameSpec?.split(",").map((s) => s.trim()),
      outDir: required(parsed, "out"),
      embedder,
    });
    for (const manifest of result.manifests) console.error(`wrote ${manifest}`);
    return 0;
  } catch (err) {
    console.error(`export_captions: ${(err as Error).message}`);
    return 2;
  }
}

main().then((code) => {
  process.exitCode = code;
});
