#!/usr/bin/env node
/** Command line wrapper: weight-exporter --manifest m.json --out w.tarc
 *
 * Exit codes: 0 ok, 1 usage, 2 data or contract error.
 */

import { parseArgs } from "util";

import { exportToFile } from "./export";

const USAGE = "usage: weight-exporter --manifest <json> --out <tarc>";

export function main(argv: string[]): number {
  let values: { manifest?: string; out?: string; help?: boolean };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        manifest: { type: "string" },
        out: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
    }));
  } catch (err) {
    console.error(`${err instanceof Error ? err.message : err}\n${USAGE}`);
    return 1;
  }
  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  if (!values.manifest || !values.out) {
    console.error(USAGE);
    return 1;
  }
  try {
    const result = exportToFile(values.manifest, values.out);
    console.log(
      `wrote ${values.out}: ${result.tensors.size} tensors, ${result.paramTotal} parameters`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
