#!/usr/bin/env node
/**
 * Reference model-runner adapter.
 *
 * Serves one of the built-in backends (identity, bicubic, or a wrapped
 * shell command) over either runner protocol mode:
 *
 *   server  — line-delimited JSON requests on stdin, replies on stdout
 *   command — one image per process: --input/--output/--scale argv
 *
 * Examples:
 *   srbench-adapter --backend bicubic --mode server
 *   srbench-adapter --backend identity --mode command --input lr.png --output sr.png --scale 2
 *   srbench-adapter --backend shell --mode server -- convert {input} -resize x{scale} {output}
 */

import { realpathSync } from "node:fs";
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { Backend, bicubicBackend, identityBackend, shellBackend } from "./backends.js";
import { readPng, writePng } from "./png.js";
import { resizeBicubic } from "./resize.js";
import { serve } from "./protocol.js";

const USAGE = `usage: srbench-adapter --backend <identity|bicubic|shell> [--mode <server|command>]
                       [--input-range <byte255|unit01>]
                       [--input PATH --output PATH --scale N]   (command mode)
                       [-- COMMAND with {input} {output} {scale}]   (shell backend)`;

export interface AdapterArgs {
  backend: Backend;
  mode: "server" | "command";
  inputRange: "byte255" | "unit01";
  input?: string;
  output?: string;
  scale?: number;
}

export function parseAdapterArgs(argv: string[]): AdapterArgs {
  const splitAt = argv.indexOf("--");
  const own = splitAt === -1 ? argv : argv.slice(0, splitAt);
  const template = splitAt === -1 ? [] : argv.slice(splitAt + 1);

  const { values } = parseArgs({
    args: own,
    options: {
      backend: { type: "string" },
      mode: { type: "string", default: "server" },
      "input-range": { type: "string", default: "byte255" },
      input: { type: "string" },
      output: { type: "string" },
      scale: { type: "string" },
    },
    allowPositionals: false,
  });

  let backend: Backend;
  switch (values.backend) {
    case "identity":
      backend = identityBackend();
      break;
    case "bicubic":
      backend = bicubicBackend();
      break;
    case "shell":
      backend = shellBackend(template);
      break;
    case undefined:
      throw new Error(`--backend is required\n${USAGE}`);
    default:
      throw new Error(`unknown backend "${values.backend}"\n${USAGE}`);
  }
  if (values.backend !== "shell" && template.length > 0) {
    throw new Error(`a command template after -- only makes sense with --backend shell`);
  }

  const mode = values.mode;
  if (mode !== "server" && mode !== "command") {
    throw new Error(`unknown mode "${mode}"\n${USAGE}`);
  }
  const inputRange = values["input-range"];
  if (inputRange !== "byte255" && inputRange !== "unit01") {
    throw new Error(`unknown input range "${inputRange}"\n${USAGE}`);
  }

  const args: AdapterArgs = { backend, mode, inputRange };
  if (values.input !== undefined) {
    args.input = values.input;
  }
  if (values.output !== undefined) {
    args.output = values.output;
  }
  if (values.scale !== undefined) {
    const scale = Number(values.scale);
    if (!Number.isInteger(scale) || scale < 1) {
      throw new Error(`--scale must be a positive integer, got "${values.scale}"`);
    }
    args.scale = scale;
  }
  return args;
}

async function runCommandMode(args: AdapterArgs): Promise<void> {
  if (!args.input || !args.output || args.scale === undefined) {
    throw new Error(`command mode requires --input, --output, and --scale\n${USAGE}`);
  }
  const backend = args.backend;
  if (backend.kind === "file") {
    await backend.run(args.input, args.output, args.scale);
    return;
  }
  const peak = args.inputRange === "unit01" ? 1.0 : 255.0;
  const image = readPng(args.input);
  if (peak !== 255.0) {
    for (let i = 0; i < image.data.length; i += 1) {
      image.data[i]! /= 255.0;
    }
  }
  const result = backend.run(image, args.scale, peak);
  if (peak !== 255.0) {
    for (let i = 0; i < result.data.length; i += 1) {
      result.data[i]! *= 255.0;
    }
  }
  writePng(args.output, result);
}

export async function main(argv: string[]): Promise<number> {
  let args: AdapterArgs;
  try {
    args = parseAdapterArgs(argv);
  } catch (err) {
    process.stderr.write(`${err instanceof Error ? err.message : String(err)}\n`);
    return 2;
  }
  try {
    if (args.mode === "server") {
      await serve({ backend: args.backend, inputRange: args.inputRange });
    } else {
      await runCommandMode(args);
    }
  } catch (err) {
    process.stderr.write(`adapter: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
  return 0;
}

// Keep module importable for tests; only run when invoked as a script.
function invokedDirectly(): boolean {
  if (process.argv[1] === undefined) {
    return false;
  }
  try {
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}

// resizeBicubic is re-exported so embedders can reuse the kernel directly.
export { resizeBicubic };
