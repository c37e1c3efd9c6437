/** Caption template instantiation and label-value list parsing. */

export const PLACEHOLDER = "[label]";

export function assertTemplate(template: string): void {
  const first = template.indexOf(PLACEHOLDER);
  if (first < 0 || template.indexOf(PLACEHOLDER, first + 1) >= 0) {
    throw new Error(
      `template must contain the placeholder '${PLACEHOLDER}' exactly once: ${JSON.stringify(template)}`,
    );
  }
}

export function instantiate(template: string, label: string | number): string {
  assertTemplate(template);
  return template.replace(PLACEHOLDER, String(label));
}

/**
 * Parse a value specification like "1..100" or "1993,1994,1997..2002".
 * Ranges are inclusive with step 1.
 */
export function parseValueSpec(spec: string): number[] {
  const values: number[] = [];
  for (const token of spec.split(",")) {
    const trimmed = token.trim();
    if (trimmed === "") continue;
    const range = trimmed.match(/^(-?\d+(?:\.\d+)?)\.\.(-?\d+(?:\.\d+)?)$/);
    if (range) {
      const lo = Number(range[1]);
      const hi = Number(range[2]);
      if (hi < lo) throw new Error(`empty range: ${trimmed}`);
      for (let v = lo; v <= hi; v++) values.push(v);
      continue;
    }
    const v = Number(trimmed);
    if (!Number.isFinite(v)) throw new Error(`not a number or range: ${trimmed}`);
    values.push(v);
  }
  if (values.length === 0) throw new Error("empty label value list");
  return values;
}

/** Filesystem-safe slug for per-template output directories. */
export function templateSlug(template: string): string {
  const slug = template
    .toLowerCase()
    .replace(/\[label\]/g, "x")
    .replace(/[^a-z0-9]+/g, "-")
    .replace(/^-+|-+$/g, "");
  return slug || "template";
}
