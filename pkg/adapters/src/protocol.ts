/**
 * Server-mode protocol loop.
 *
 * The harness speaks line-delimited JSON over stdin/stdout.  Each request
 * carries an id plus input/output paths and a scale; the reply echoes the
 * id with status "ok" or "error".  Echo requests ({"id": ..., "echo": true})
 * are answered immediately and are how the harness probes readiness.
 * stdout is reserved for protocol replies — all diagnostics go to stderr —
 * and every reply is flushed as soon as it is written.  EOF on stdin means
 * the session is over and the process exits cleanly.
 */

import { createInterface } from "node:readline";
import { Writable } from "node:stream";

import { Backend } from "./backends.js";
import { readPng, writePng, PlanarImage } from "./png.js";

export interface ServeOptions {
  backend: Backend;
  /** Pixel backends see values divided by this before run() and multiplied after. */
  inputRange: "byte255" | "unit01";
  input?: NodeJS.ReadableStream;
  output?: Writable;
  diagnostics?: Writable;
}

interface Request {
  id: unknown;
  echo?: unknown;
  input?: unknown;
  output?: unknown;
  scale?: unknown;
}

function writeReply(out: Writable, id: unknown, status: "ok" | "error", message = ""): void {
  const reply: Record<string, unknown> = { id, status };
  if (message) {
    reply["message"] = message;
  }
  out.write(JSON.stringify(reply) + "\n");
}

function scaleInPlace(image: PlanarImage, factor: number): PlanarImage {
  const data = image.data;
  for (let i = 0; i < data.length; i += 1) {
    data[i]! *= factor;
  }
  return image;
}

/** Validates one request's shape; returns an error message or null if ok. */
function requestProblem(req: Request): string | null {
  for (const field of ["input", "output"] as const) {
    if (typeof req[field] !== "string" || req[field] === "") {
      return `request is missing required field "${field}"`;
    }
  }
  if (typeof req.scale !== "number" || !Number.isInteger(req.scale) || req.scale < 1) {
    return 'request is missing required field "scale" (positive integer)';
  }
  return null;
}

async function handleRequest(req: Request, opts: ServeOptions): Promise<void> {
  const problem = requestProblem(req);
  if (problem !== null) {
    throw new Error(problem);
  }
  const input = req.input as string;
  const output = req.output as string;
  const scale = req.scale as number;
  const backend = opts.backend;
  if (backend.kind === "file") {
    await backend.run(input, output, scale);
    return;
  }
  const peak = opts.inputRange === "unit01" ? 1.0 : 255.0;
  let image = readPng(input);
  if (peak !== 255.0) {
    image = scaleInPlace(image, peak / 255.0);
  }
  let result = backend.run(image, scale, peak);
  if (peak !== 255.0) {
    result = scaleInPlace(result, 255.0 / peak);
  }
  writePng(output, result);
}

/** Runs the request/reply loop until stdin EOF.  Resolves on clean end. */
export async function serve(opts: ServeOptions): Promise<void> {
  const input = opts.input ?? process.stdin;
  const output = opts.output ?? process.stdout;
  const diagnostics = opts.diagnostics ?? process.stderr;
  const reader = createInterface({ input, crlfDelay: Infinity });

  for await (const line of reader) {
    if (line.trim() === "") {
      continue;
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      diagnostics.write(`adapter: ignoring unparseable request line: ${line.slice(0, 200)}\n`);
      continue;
    }
    if (typeof parsed !== "object" || parsed === null || !("id" in parsed)) {
      diagnostics.write("adapter: ignoring request without an id\n");
      continue;
    }
    const req = parsed as Request;
    if (req.echo === true) {
      writeReply(output, req.id, "ok");
      continue;
    }
    try {
      await handleRequest(req, opts);
      writeReply(output, req.id, "ok");
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      writeReply(output, req.id, "error", message);
    }
  }
}
