/**
 * Embedding backends.
 *
 * `clip:<model>` (aliases: vitb32) runs a real CLIP checkpoint through
 * @xenova/transformers, loaded dynamically so the exporter works offline
 * without it. `hash:<dim>` is a deterministic pseudo-embedder over raw
 * file/text bytes, used for tests and offline pipeline rehearsals; it has
 * no semantic content.
 */

import { readFile } from "node:fs/promises";

export interface Embedder {
  readonly name: string;
  readonly dim: number | null; // null until first use when model-defined
  embedImage(path: string): Promise<Float32Array>;
  embedText(text: string): Promise<Float32Array>;
}

const MODEL_ALIASES: Record<string, string> = {
  vitb32: "Xenova/clip-vit-base-patch32",
  vitb16: "Xenova/clip-vit-base-patch16",
};

export function resolveEmbedder(spec: string): Embedder {
  if (spec.startsWith("hash:")) {
    const dim = Number(spec.slice(5));
    if (!Number.isInteger(dim) || dim < 2) {
      throw new Error(`hash embedder needs an integer dimension >= 2, got ${spec}`);
    }
    return new HashEmbedder(dim);
  }
  const model = spec.startsWith("clip:") ? spec.slice(5) : MODEL_ALIASES[spec];
  if (!model) {
    throw new Error(
      `unknown model ${JSON.stringify(spec)}; use vitb32, clip:<hf-model-id>, or hash:<dim>`,
    );
  }
  return new ClipEmbedder(model);
}

// ---------------------------------------------------------------------------
// deterministic hash embedder
// ---------------------------------------------------------------------------

function fnv1a(bytes: Uint8Array, seed: number): number {
  let h = (0x811c9dc5 ^ seed) >>> 0;
  for (const b of bytes) {
    h ^= b;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

/** xorshift32; deterministic across platforms (integer ops only) */
function* xorshift32(seed: number): Generator<number> {
  let x = seed || 0x9e3779b9;
  for (;;) {
    x ^= x << 13;
    x >>>= 0;
    x ^= x >>> 17;
    x ^= x << 5;
    x >>>= 0;
    yield x / 0x100000000; // [0, 1)
  }
}

export class HashEmbedder implements Embedder {
  readonly name: string;
  readonly dim: number;

  constructor(dim: number) {
    this.dim = dim;
    this.name = `hash:${dim}`;
  }

  private fromBytes(bytes: Uint8Array): Float32Array {
    const out = new Float32Array(this.dim);
    const stream = xorshift32(fnv1a(bytes, 0xabcdef));
    for (let i = 0; i < this.dim; i++) {
      out[i] = 2 * stream.next().value - 1;
    }
    return out;
  }

  async embedImage(path: string): Promise<Float32Array> {
    return this.fromBytes(await readFile(path));
  }

  async embedText(text: string): Promise<Float32Array> {
    return this.fromBytes(Buffer.from(text, "utf8"));
  }
}

// ---------------------------------------------------------------------------
// CLIP via @xenova/transformers (dynamic import)
// ---------------------------------------------------------------------------

export class ClipEmbedder implements Embedder {
  readonly name: string;
  dim: number | null = null;
  private readonly model: string;
  // transformers.js types are not installed; hold the pieces loosely
  private pieces: Promise<{
    tokenizer: any;
    processor: any;
    text: any;
    vision: any;
    RawImage: any;
  }> | null = null;

  constructor(model: string) {
    this.model = model;
    this.name = `clip:${model}`;
  }

  private load() {
    if (this.pieces === null) {
      this.pieces = (async () => {
        let transformers: any;
        try {
          transformers = await import("@xenova/transformers");
        } catch {
          throw new Error(
            "the CLIP backend needs the optional dependency @xenova/transformers " +
              "(npm install @xenova/transformers)",
          );
        }
        const {
          AutoTokenizer,
          AutoProcessor,
          CLIPTextModelWithProjection,
          CLIPVisionModelWithProjection,
          RawImage,
        } = transformers;
        const [tokenizer, processor, text, vision] = await Promise.all([
          AutoTokenizer.from_pretrained(this.model),
          AutoProcessor.from_pretrained(this.model),
          CLIPTextModelWithProjection.from_pretrained(this.model),
          CLIPVisionModelWithProjection.from_pretrained(this.model),
        ]);
        return { tokenizer, processor, text, vision, RawImage };
      })();
    }
    return this.pieces;
  }

  async embedImage(path: string): Promise<Float32Array> {
    const { processor, vision, RawImage } = await this.load();
    const image = await RawImage.read(path);
    const inputs = await processor(image);
    const { image_embeds } = await vision(inputs);
    const out = Float32Array.from(image_embeds.data as Iterable<number>);
    this.dim = out.length;
    return out;
  }

  async embedText(text: string): Promise<Float32Array> {
    const { tokenizer, text: textModel } = await this.load();
    const inputs = tokenizer([text], { padding: true, truncation: true });
    const { text_embeds } = await textModel(inputs);
    const out = Float32Array.from(text_embeds.data as Iterable<number>);
    this.dim = out.length;
    return out;
  }
}
