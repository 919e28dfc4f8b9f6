#!/usr/bin/env node
/**
 * Command-line front end for the conformance suite.
 *
 *   srbench-conformance [--timeout MS] [--json] [--keep-work] -- ADAPTER_CMD ...
 *
 * Prints one PASS/FAIL line per check (or the full report as JSON with
 * --json) and exits 0 only when every check passed.
 */

import { realpathSync } from "node:fs";
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { runConformance, ConformanceOptions } from "./conformance.js";

const USAGE = "usage: srbench-conformance [--timeout MS] [--json] [--keep-work] -- ADAPTER_CMD ...";

export async function main(argv: string[]): Promise<number> {
  const splitAt = argv.indexOf("--");
  if (splitAt === -1 || splitAt === argv.length - 1) {
    process.stderr.write(`adapter command is required after --\n${USAGE}\n`);
    return 2;
  }
  const own = argv.slice(0, splitAt);
  const adapterArgv = argv.slice(splitAt + 1);

  let values: { timeout?: string; json?: boolean; "keep-work"?: boolean };
  try {
    values = parseArgs({
      args: own,
      options: {
        timeout: { type: "string" },
        json: { type: "boolean", default: false },
        "keep-work": { type: "boolean", default: false },
      },
      allowPositionals: false,
    }).values;
  } catch (err) {
    process.stderr.write(`${err instanceof Error ? err.message : String(err)}\n${USAGE}\n`);
    return 2;
  }

  const opts: ConformanceOptions = {};
  if (values.timeout !== undefined) {
    const timeoutMs = Number(values.timeout);
    if (!Number.isFinite(timeoutMs) || timeoutMs <= 0) {
      process.stderr.write(`--timeout must be a positive number of milliseconds\n`);
      return 2;
    }
    opts.timeoutMs = timeoutMs;
  }
  if (values["keep-work"]) {
    opts.keepWork = true;
  }

  const report = await runConformance(adapterArgv, opts);

  if (values.json) {
    process.stdout.write(JSON.stringify(report, null, 2) + "\n");
  } else {
    for (const check of report.checks) {
      const mark = check.passed ? "PASS" : "FAIL";
      process.stdout.write(`${mark}  ${check.name} — ${check.detail}\n`);
    }
    const failed = report.checks.filter((c) => !c.passed).length;
    process.stdout.write(
      failed === 0
        ? `all ${report.checks.length} checks passed\n`
        : `${failed} of ${report.checks.length} checks failed\n`,
    );
  }
  return report.passed ? 0 : 1;
}

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
