#!/usr/bin/env node
/**
 * figures — render figure specs to SVG.
 *
 * Usage:
 *   figures render <spec.json> [<spec.json> ...]
 *   figures kinds
 */

import { parseArgs } from "util";
import { renderToFile } from "./figures";
import { FIGURE_KINDS, loadSpec } from "./schema";

const USAGE = "usage: figures render <spec.json> [...] | figures kinds";

export function main(argv: string[]): number {
  let positionals: string[];
  try {
    ({ positionals } = parseArgs({ args: argv, allowPositionals: true, options: {} }));
  } catch (e) {
    console.error((e as Error).message);
    return 2;
  }
  const [command, ...specPaths] = positionals;

  if (command === "kinds") {
    for (const kind of FIGURE_KINDS) console.log(kind);
    return 0;
  }
  if (command !== "render" || specPaths.length === 0) {
    console.error(USAGE);
    return 2;
  }
  for (const specPath of specPaths) {
    try {
      const out = renderToFile(loadSpec(specPath));
      console.log(`wrote ${out}`);
    } catch (e) {
      console.error(`${specPath}: ${(e as Error).message}`);
      return 1;
    }
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
