#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { FIGURE_BUILDERS } from "./figures.js";
import { render } from "./render.js";
import { ValidationError } from "./schema.js";

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .command("render", "render figures + HTML index from polymerlab outputs")
    .demandCommand(1)
    .option("input", {
      alias: "i",
      type: "string",
      array: true,
      demandOption: true,
      describe: "CSV files or directories of CSV/JSON outputs",
    })
    .option("out", {
      alias: "o",
      type: "string",
      demandOption: true,
      describe: "output directory for SVG figures and index.html",
    })
    .option("figures", {
      type: "string",
      array: true,
      describe: `figure selections (default: all of ${Object.keys(FIGURE_BUILDERS).join(", ")})`,
    })
    .strict()
    .parse();

  try {
    const result = render({
      inputs: argv.input as string[],
      outDir: argv.out as string,
      figures: argv.figures as string[] | undefined,
    });
    console.log(`wrote ${result.figures.length} figure(s) and ${result.index}`);
    return 0;
  } catch (err) {
    if (err instanceof ValidationError) {
      console.error(`validation error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

main().then((code) => process.exit(code));
