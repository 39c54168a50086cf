#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { Kind, Sidecar, render } from "./render.js";

const KINDS: Kind[] = ["ramp-overlay", "spectrum", "heatmap", "cuts", "comparison"];

export function main(argv: string[]): number {
  const args = yargs(argv)
    .command("$0 <kind>", "render one figure from an iontfim CSV artifact", (y) =>
      y.positional("kind", { choices: KINDS, demandOption: true }),
    )
    .option("in", { type: "string", demandOption: true, describe: "input CSV path" })
    .option("sidecar", { type: "string", describe: "scan JSON sidecar (optimum marker)" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("shared-scale", { type: "boolean", default: false,
                              describe: "normalize heatmap colors to [0, 1]" })
    .strict()
    .exitProcess(false)
    .parseSync();

  try {
    const csvText = readFileSync(args.in, "utf-8");
    let sidecar: Sidecar | undefined;
    if (args.sidecar !== undefined) {
      sidecar = JSON.parse(readFileSync(args.sidecar, "utf-8")) as Sidecar;
    }
    const svg = render(args.kind as Kind, csvText, {
      sidecar,
      sharedScale: args.sharedScale,
    });
    writeFileSync(args.out, svg);
    return 0;
  } catch (err) {
    console.error(`plot: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exitCode = main(hideBin(process.argv));
}
