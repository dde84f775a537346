/**
 * plot <kind> --in <csv> [--in <csv> ...] --out <image.svg>
 *
 * Kinds: decay | profile | spectrum-map | ratio-hist.  Consumes the
 * CSV artifacts written by the similab driver; performs no numerical
 * work beyond axis transforms.  Exit codes: 0 ok, 2 usage, 3 missing
 * file, 4 schema violation (stderr names the column), 5 empty input.
 */

import * as fs from "fs";

import { EmptyCsvError, SchemaError } from "./csv";
import { RENDERERS } from "./render";

function usage(): string {
  return (
    "usage: plot <decay|profile|spectrum-map|ratio-hist> " +
    "--in <csv> [--in <csv> ...] --out <image.svg>"
  );
}

export function main(argv: string[]): number {
  const args = argv.slice(2);
  if (args.length === 0) {
    console.error(usage());
    return 2;
  }
  const kind = args[0];
  const inputs: string[] = [];
  let out = "";
  for (let i = 1; i < args.length; i++) {
    if (args[i] === "--in" && i + 1 < args.length) {
      inputs.push(args[++i]);
    } else if (args[i] === "--out" && i + 1 < args.length) {
      out = args[++i];
    } else {
      console.error(`unknown argument '${args[i]}'\n${usage()}`);
      return 2;
    }
  }
  const render = RENDERERS[kind];
  if (!render) {
    console.error(`unknown figure kind '${kind}'\n${usage()}`);
    return 2;
  }
  if (inputs.length === 0 || out === "") {
    console.error(usage());
    return 2;
  }
  for (const file of inputs) {
    if (!fs.existsSync(file)) {
      console.error(`input file not found: ${file}`);
      return 3;
    }
  }
  try {
    const svg = render(inputs);
    fs.writeFileSync(out, svg);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema violation: ${err.message}`);
      return 4;
    }
    if (err instanceof EmptyCsvError) {
      console.error(`no rows: ${err.message}`);
      return 5;
    }
    throw err;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv));
}
