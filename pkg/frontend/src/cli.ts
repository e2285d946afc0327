#!/usr/bin/env node
/**
 * plots render --spec <file> [--out <image>]
 *
 * Renders the multi-panel comparison figure described by a flat
 * key-value spec file into an SVG image.
 */

import { readFileSync } from "fs";

import { CsvError } from "./csv";
import { parseFigureSpec, SpecError } from "./figspec";
import { render } from "./render";

function usage(): never {
  console.error("usage: plots render --spec <file> [--out <image>]");
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv.length === 0 || argv[0] !== "render") usage();
  let specPath: string | null = null;
  let out: string | null = null;
  for (let i = 1; i < argv.length; i++) {
    if (argv[i] === "--spec") specPath = argv[++i];
    else if (argv[i] === "--out") out = argv[++i];
    else usage();
  }
  if (!specPath) usage();
  try {
    const spec = parseFigureSpec(readFileSync(specPath, "utf8"));
    const written = render(spec, out);
    console.log(`wrote ${written}`);
    return 0;
  } catch (err) {
    if (err instanceof SpecError || err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && (err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
