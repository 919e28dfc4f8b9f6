/**
 * Protocol conformance suite for server-mode model runners.
 *
 * Spawns the adapter under test and drives it through the request/reply
 * contract: echo readiness, sequential ids, per-reply flushing, error
 * replies that do not kill the session, tolerance of garbage input lines,
 * stdout reserved for replies, and clean exit on stdin EOF.
 *
 * Every upscale request uses scale 1 on purpose.  At scale 1 any faithful
 * resampler — identity, bicubic, or a wrapped command — reproduces its
 * input exactly, so the suite can verify pixel fidelity without assuming
 * anything about the model's kernel.  Output-dimension checking at real
 * scales is the harness's job, not the adapter's.
 *
 * The suite never hangs on a misbehaving adapter: every wait carries a
 * timeout and an early exit of the child fails pending checks immediately.
 */

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createInterface } from "node:readline";

import { PlanarImage, readPng, writePng } from "./png.js";

export interface CheckResult {
  name: string;
  passed: boolean;
  detail: string;
}

export interface ConformanceReport {
  adapter: string[];
  passed: boolean;
  checks: CheckResult[];
}

export interface ConformanceOptions {
  /** Per-reply wait budget in milliseconds (default 10000). */
  timeoutMs?: number;
  /** Directory for request/response images (default: a fresh temp dir). */
  workDir?: string;
  /** Keep the work directory instead of deleting it at the end. */
  keepWork?: boolean;
}

interface Reply {
  id: unknown;
  status: string;
  message?: unknown;
}

interface Waiter {
  resolve: (reply: Reply) => void;
  reject: (err: Error) => void;
  timer: NodeJS.Timeout;
}

function isReply(value: unknown): value is Reply {
  return (
    typeof value === "object" &&
    value !== null &&
    "id" in value &&
    "status" in value &&
    ((value as Reply).status === "ok" || (value as Reply).status === "error")
  );
}

/** One spawned adapter process plus its reply stream. */
class AdapterSession {
  readonly violations: string[] = [];
  stderrText = "";
  exit: { code: number | null; signal: NodeJS.Signals | null } | null = null;

  private readonly child: ChildProcess;
  private readonly queue: Reply[] = [];
  private waiter: Waiter | null = null;
  private readonly exitWaiters: Array<() => void> = [];

  constructor(argv: string[]) {
    this.child = spawn(argv[0]!, argv.slice(1), { stdio: ["pipe", "pipe", "pipe"] });
    this.child.stdin!.on("error", () => {
      /* writes after exit surface via this.exit, not EPIPE crashes */
    });
    const lines = createInterface({ input: this.child.stdout!, crlfDelay: Infinity });
    lines.on("line", (line) => this.onLine(line));
    this.child.stderr!.on("data", (chunk: Buffer) => {
      this.stderrText = (this.stderrText + chunk.toString("utf-8")).slice(-8000);
    });
    const finish = (code: number | null, signal: NodeJS.Signals | null): void => {
      if (this.exit !== null) {
        return;
      }
      this.exit = { code, signal };
      if (this.waiter !== null) {
        const w = this.waiter;
        this.waiter = null;
        clearTimeout(w.timer);
        w.reject(new Error(`adapter exited before replying (${describeExit(this.exit)})`));
      }
      for (const notify of this.exitWaiters.splice(0)) {
        notify();
      }
    };
    this.child.on("close", finish);
    this.child.on("error", () => finish(null, null));
  }

  private onLine(line: string): void {
    if (line.trim() === "") {
      return;
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      this.violations.push(line);
      return;
    }
    if (!isReply(parsed)) {
      this.violations.push(line);
      return;
    }
    if (this.waiter !== null) {
      const w = this.waiter;
      this.waiter = null;
      clearTimeout(w.timer);
      w.resolve(parsed);
    } else {
      this.queue.push(parsed);
    }
  }

  sendLine(raw: string): boolean {
    if (this.exit !== null || this.child.stdin === null) {
      return false;
    }
    return this.child.stdin.write(raw + "\n") || true;
  }

  nextReply(timeoutMs: number): Promise<Reply> {
    const queued = this.queue.shift();
    if (queued !== undefined) {
      return Promise.resolve(queued);
    }
    if (this.exit !== null) {
      return Promise.reject(
        new Error(`adapter exited before replying (${describeExit(this.exit)})`),
      );
    }
    if (this.waiter !== null) {
      return Promise.reject(new Error("internal: concurrent waits on one session"));
    }
    return new Promise<Reply>((resolve, reject) => {
      const timer = setTimeout(() => {
        this.waiter = null;
        reject(new Error(`no reply within ${timeoutMs} ms`));
      }, timeoutMs);
      this.waiter = { resolve, reject, timer };
    });
  }

  async request(req: Record<string, unknown>, timeoutMs: number): Promise<Reply> {
    if (!this.sendLine(JSON.stringify(req))) {
      throw new Error(`adapter is no longer running (${describeExit(this.exit)})`);
    }
    const reply = await this.nextReply(timeoutMs);
    if (reply.id !== req["id"]) {
      throw new Error(
        `reply id ${JSON.stringify(reply.id)} does not match request id ${JSON.stringify(req["id"])}`,
      );
    }
    return reply;
  }

  endInput(): void {
    this.child.stdin?.end();
  }

  waitExit(timeoutMs: number): Promise<{ code: number | null; signal: NodeJS.Signals | null } | null> {
    if (this.exit !== null) {
      return Promise.resolve(this.exit);
    }
    return new Promise((resolve) => {
      const timer = setTimeout(() => resolve(null), timeoutMs);
      this.exitWaiters.push(() => {
        clearTimeout(timer);
        resolve(this.exit);
      });
    });
  }

  kill(): void {
    if (this.exit === null) {
      this.child.kill("SIGKILL");
    }
  }
}

function describeExit(exit: { code: number | null; signal: NodeJS.Signals | null } | null): string {
  if (exit === null) {
    return "still running";
  }
  return exit.signal !== null ? `signal ${exit.signal}` : `exit code ${exit.code}`;
}

/** Deterministic noise image so fidelity failures are reproducible. */
function noiseImage(width: number, height: number, seed: number): PlanarImage {
  let state = seed >>> 0;
  const next = (): number => {
    state = (1664525 * state + 1013904223) >>> 0;
    return state >>> 24;
  };
  const data = new Float64Array(3 * height * width);
  for (let i = 0; i < data.length; i += 1) {
    data[i] = next();
  }
  return { width, height, channels: 3, data };
}

/** Smooth gradient compresses well, keeping the large-image check about size. */
function gradientImage(width: number, height: number): PlanarImage {
  const data = new Float64Array(3 * height * width);
  for (let c = 0; c < 3; c += 1) {
    for (let y = 0; y < height; y += 1) {
      for (let x = 0; x < width; x += 1) {
        data[c * height * width + y * width + x] = (x + y + c * 37) % 256;
      }
    }
  }
  return { width, height, channels: 3, data };
}

function imagesEqual(a: PlanarImage, b: PlanarImage): boolean {
  if (a.width !== b.width || a.height !== b.height || a.channels !== b.channels) {
    return false;
  }
  for (let i = 0; i < a.data.length; i += 1) {
    if (a.data[i] !== b.data[i]) {
      return false;
    }
  }
  return true;
}

async function runCheck(name: string, fn: () => Promise<string>): Promise<CheckResult> {
  try {
    const detail = await fn();
    return { name, passed: true, detail };
  } catch (err) {
    return { name, passed: false, detail: err instanceof Error ? err.message : String(err) };
  }
}

/** Drives the adapter given as argv through every protocol check. */
export async function runConformance(
  argv: string[],
  opts: ConformanceOptions = {},
): Promise<ConformanceReport> {
  if (argv.length === 0) {
    throw new Error("adapter command is required");
  }
  const timeoutMs = opts.timeoutMs ?? 10_000;
  const workDir = opts.workDir ?? mkdtempSync(join(tmpdir(), "srbench-conformance-"));
  const session = new AdapterSession(argv);
  const checks: CheckResult[] = [];
  let requestCounter = 0;

  const pixelRequest = async (
    image: PlanarImage,
    label: string,
    waitMs: number,
  ): Promise<{ reply: Reply; inputPath: string; outputPath: string }> => {
    requestCounter += 1;
    const id = `${label}-${requestCounter}`;
    const inputPath = join(workDir, `${id}-in.png`);
    const outputPath = join(workDir, `${id}-out.png`);
    writePng(inputPath, image);
    const reply = await session.request(
      { id, input: inputPath, output: outputPath, scale: 1 },
      waitMs,
    );
    return { reply, inputPath, outputPath };
  };

  const expectOk = (reply: Reply): void => {
    if (reply.status !== "ok") {
      throw new Error(`expected ok reply, got status "${reply.status}" (${String(reply.message ?? "")})`);
    }
  };

  const plan: Array<[string, () => Promise<string>]> = [
    [
      "startup echo",
      async () => {
        const reply = await session.request({ id: "conformance-hello", echo: true }, timeoutMs);
        expectOk(reply);
        return "echo request answered ok";
      },
    ],
    [
      "sequential requests",
      async () => {
        const image = noiseImage(8, 6, 11);
        for (let i = 0; i < 5; i += 1) {
          const { reply, outputPath } = await pixelRequest(image, "seq", timeoutMs);
          expectOk(reply);
          readPng(outputPath); // must exist and decode
        }
        return "5 requests each answered in turn with matching ids and written outputs";
      },
    ],
    [
      "scale-1 passthrough",
      async () => {
        const image = noiseImage(16, 12, 29);
        const { reply, outputPath } = await pixelRequest(image, "fid", timeoutMs);
        expectOk(reply);
        const result = readPng(outputPath);
        if (!imagesEqual(image, result)) {
          throw new Error(
            `scale-1 output differs from input (${result.width}x${result.height} vs ${image.width}x${image.height})`,
          );
        }
        return "scale-1 request reproduced the input pixels exactly";
      },
    ],
    [
      "error reply on bad request",
      async () => {
        requestCounter += 1;
        const id = `bad-${requestCounter}`;
        const inputPath = join(workDir, `${id}-in.png`);
        writePng(inputPath, noiseImage(8, 6, 43));
        const reply = await session.request(
          { id, input: inputPath, output: join(workDir, `${id}-out.png`) },
          timeoutMs,
        );
        if (reply.status !== "error") {
          throw new Error(`request without "scale" was answered "${reply.status}", expected an error reply`);
        }
        const message = String(reply.message ?? "");
        if (!message.toLowerCase().includes("scale")) {
          throw new Error(`error message does not name the missing field: "${message}"`);
        }
        const after = await session.request({ id: `${id}-after`, echo: true }, timeoutMs);
        expectOk(after);
        return "malformed request got an error reply naming the field and the session survived";
      },
    ],
    [
      "survives garbage input",
      async () => {
        if (!session.sendLine("this is not a protocol message {")) {
          throw new Error(`adapter is no longer running (${describeExit(session.exit)})`);
        }
        const reply = await session.request({ id: "post-garbage", echo: true }, timeoutMs);
        expectOk(reply);
        return "unparseable line was tolerated and the next request succeeded";
      },
    ],
    [
      "prompt reply flushing",
      async () => {
        const started = Date.now();
        const { reply } = await pixelRequest(noiseImage(8, 6, 77), "flush", timeoutMs);
        expectOk(reply);
        return `reply arrived ${Date.now() - started} ms after the request with nothing else in flight`;
      },
    ],
    [
      "large image",
      async () => {
        const image = gradientImage(2048, 2048);
        const { reply, outputPath } = await pixelRequest(image, "large", timeoutMs * 4);
        expectOk(reply);
        const result = readPng(outputPath);
        if (result.width !== 2048 || result.height !== 2048) {
          throw new Error(`large output is ${result.width}x${result.height}, expected 2048x2048`);
        }
        return "2048x2048 request completed";
      },
    ],
    [
      "clean shutdown on EOF",
      async () => {
        if (session.exit !== null) {
          throw new Error(`adapter exited before the session ended (${describeExit(session.exit)})`);
        }
        session.endInput();
        const exit = await session.waitExit(timeoutMs);
        if (exit === null) {
          throw new Error(`adapter still running ${timeoutMs} ms after stdin closed`);
        }
        if (exit.signal !== null || exit.code !== 0) {
          throw new Error(`adapter ended with ${describeExit(exit)}, expected exit code 0`);
        }
        return "adapter exited 0 once stdin closed";
      },
    ],
  ];

  try {
    for (const [name, fn] of plan) {
      checks.push(await runCheck(name, fn));
    }
    checks.push(
      await runCheck("stdout purity", async () => {
        if (session.violations.length > 0) {
          const sample = session.violations[0]!.slice(0, 120);
          throw new Error(
            `${session.violations.length} non-reply line(s) appeared on stdout, e.g. "${sample}"`,
          );
        }
        return "every stdout line was a protocol reply";
      }),
    );
  } finally {
    session.kill();
    if (!opts.keepWork && opts.workDir === undefined) {
      rmSync(workDir, { recursive: true, force: true });
    }
  }

  return {
    adapter: argv,
    passed: checks.every((c) => c.passed),
    checks,
  };
}
