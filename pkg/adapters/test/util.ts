// Shared helpers for the adapter tests: paths to built artifacts, a
// one-shot subprocess runner, and a tiny line-oriented protocol client.
import { spawn, ChildProcess } from "node:child_process";
import { createInterface } from "node:readline";
import { fileURLToPath } from "node:url";

export const ADAPTER_JS = fileURLToPath(new URL("../dist/adapter.js", import.meta.url));
export const CONFORMANCE_JS = fileURLToPath(new URL("../dist/conformance-cli.js", import.meta.url));
export const FIXTURE_DIR = fileURLToPath(new URL("./fixtures", import.meta.url));

export function helperPath(name: string): string {
  return fileURLToPath(new URL(`./helpers/${name}`, import.meta.url));
}

export interface RunResult {
  code: number | null;
  stdout: string;
  stderr: string;
}

/** Runs a command to completion, optionally feeding stdin, capturing both streams. */
export function run(cmd: string, args: string[], stdin?: string): Promise<RunResult> {
  return new Promise((resolve, reject) => {
    const child = spawn(cmd, args, { stdio: ["pipe", "pipe", "pipe"] });
    let stdout = "";
    let stderr = "";
    child.stdout.on("data", (chunk: Buffer) => {
      stdout += chunk.toString("utf-8");
    });
    child.stderr.on("data", (chunk: Buffer) => {
      stderr += chunk.toString("utf-8");
    });
    child.on("error", reject);
    child.on("close", (code) => resolve({ code, stdout, stderr }));
    if (stdin !== undefined) {
      child.stdin.write(stdin);
    }
    child.stdin.end();
  });
}

/** Interactive client for a server-mode adapter under test. */
export class ServerClient {
  readonly child: ChildProcess;
  stderrText = "";
  exit: { code: number | null; signal: NodeJS.Signals | null } | null = null;

  private readonly lines: string[] = [];
  private readonly lineWaiters: Array<(line: string) => void> = [];
  private readonly exitWaiters: Array<() => void> = [];

  constructor(cmd: string, args: string[]) {
    this.child = spawn(cmd, args, { stdio: ["pipe", "pipe", "pipe"] });
    this.child.stdin!.on("error", () => {
      /* exits are observed via this.exit */
    });
    const reader = createInterface({ input: this.child.stdout!, crlfDelay: Infinity });
    reader.on("line", (line) => {
      const waiter = this.lineWaiters.shift();
      if (waiter !== undefined) {
        waiter(line);
      } else {
        this.lines.push(line);
      }
    });
    this.child.stderr!.on("data", (chunk: Buffer) => {
      this.stderrText += chunk.toString("utf-8");
    });
    this.child.on("close", (code, signal) => {
      this.exit = { code, signal };
      for (const notify of this.exitWaiters.splice(0)) {
        notify();
      }
    });
  }

  sendRaw(line: string): void {
    this.child.stdin!.write(line + "\n");
  }

  send(obj: unknown): void {
    this.sendRaw(JSON.stringify(obj));
  }

  nextLine(timeoutMs = 10_000): Promise<string> {
    const queued = this.lines.shift();
    if (queued !== undefined) {
      return Promise.resolve(queued);
    }
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error(`no reply within ${timeoutMs} ms; stderr: ${this.stderrText}`)),
        timeoutMs,
      );
      this.lineWaiters.push((line) => {
        clearTimeout(timer);
        resolve(line);
      });
    });
  }

  async request(obj: unknown, timeoutMs = 10_000): Promise<Record<string, unknown>> {
    this.send(obj);
    return JSON.parse(await this.nextLine(timeoutMs)) as Record<string, unknown>;
  }

  /** Closes stdin and waits for the process to end. */
  end(timeoutMs = 10_000): Promise<{ code: number | null; signal: NodeJS.Signals | null }> {
    this.child.stdin!.end();
    if (this.exit !== null) {
      return Promise.resolve(this.exit);
    }
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error(`adapter did not exit within ${timeoutMs} ms of EOF`)),
        timeoutMs,
      );
      this.exitWaiters.push(() => {
        clearTimeout(timer);
        resolve(this.exit!);
      });
    });
  }

  kill(): void {
    if (this.exit === null) {
      this.child.kill("SIGKILL");
    }
  }
}
