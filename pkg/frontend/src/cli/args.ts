/** Minimal flag parser: --name value pairs, repeatable flags collected. */

export interface ParsedArgs {
  flags: Map<string, string[]>;
}

export function parseArgs(argv: string[], known: string[]): ParsedArgs {
  const flags = new Map<string, string[]>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument: ${arg}`);
    const name = arg.slice(2);
    if (!known.includes(name)) throw new Error(`unknown flag: ${arg}`);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`flag ${arg} needs a value`);
    }
    i++;
    const list = flags.get(name) ?? [];
    list.push(value);
    flags.set(name, list);
  }
  return { flags };
}

export function one(parsed: ParsedArgs, name: string): string | undefined {
  const values = parsed.flags.get(name);
  if (values && values.length > 1) throw new Error(`flag --${name} given more than once`);
  return values?.[0];
}

export function required(parsed: ParsedArgs, name: string): string {
  const value = one(parsed, name);
  if (value === undefined) throw new Error(`missing required flag --${name}`);
  return value;
}
