#!/usr/bin/env node
/** CLI: render convergence|sweep --y dist --log --out fig.png <csv...> */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { renderConvergence, renderSweep } from "./render.js";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("render")
    .command("convergence <csv...>", "plot solver traces, one curve per file")
    .command("sweep <csv...>", "plot a success-rate sweep table")
    .demandCommand(1, "choose a figure kind: convergence or sweep")
    .option("y", {
      type: "string",
      default: "dist",
      choices: ["dist", "f", "grad_norm"],
      describe: "trace column for the y axis",
    })
    .option("log", {
      type: "boolean",
      describe: "log-scale y axis (default: on for convergence, off for sweep)",
    })
    .option("out", { type: "string", default: "fig.png", describe: "output PNG path" })
    .strict()
    .exitProcess(false)
    .fail((msg) => {
      throw new Error(msg);
    })
    .parse();

  const kind = String(args._[0]);
  const paths = (args.csv as string[]).map(String);
  const result =
    kind === "convergence"
      ? renderConvergence(paths, { y: args.y, log: args.log, out: args.out })
      : renderSweep(paths, { log: args.log, out: args.out });
  for (const [path, count] of result.pointCounts) {
    console.log(`${path}: ${count} points`);
  }
  console.log(`wrote ${result.outPath}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  main(hideBin(process.argv))
    .then((code) => process.exit(code))
    .catch((err) => {
      console.error(`error: ${(err as Error).message}`);
      process.exit(1);
    });
}
