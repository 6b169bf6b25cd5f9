#!/usr/bin/env node
/**
 * CLI: extract a frame-record stream from a Y4M video.
 *
 *   proctorlens-extract extract video.y4m --fps 3 --width 400 \
 *       --face-backend hog --out stream.jsonl
 *
 * Both `hog` and `cnn` route to the built-in pixel-statistics backend in
 * this build; the flag is kept so model-based backends can slot in
 * without breaking callers.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { extractToFile } from "./extract.js";

export async function run(argv: string[]): Promise<number> {
  let failed = false;
  const parser = yargs(argv)
    .scriptName("proctorlens-extract")
    .command(
      ["extract <video>", "$0 <video>"],
      "extract a detection stream from a video file",
      (y) =>
        y
          .positional("video", { type: "string", demandOption: true, describe: "input .y4m file" })
          .option("fps", { type: "number", default: 3, describe: "output sampling rate" })
          .option("width", { type: "number", default: 400, describe: "output frame width in px" })
          .option("face-backend", {
            choices: ["hog", "cnn"] as const,
            default: "hog" as const,
            describe: "face detector flavor",
          })
          .option("out", { type: "string", demandOption: true, describe: "output .jsonl path" }),
      async (args) => {
        const count = await extractToFile(args.video as string, args.out, {
          targetFps: args.fps,
          targetWidthPx: args.width,
          faceBackend: args["face-backend"],
        });
        process.stderr.write(`wrote ${count} records at ${args.fps} fps to ${args.out}\n`);
      }
    )
    .strict()
    .fail((msg, err) => {
      process.stderr.write(`error: ${msg ?? err?.message}\n`);
      failed = true;
    });
  try {
    await parser.parseAsync();
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
  return failed ? 2 : 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  run(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
