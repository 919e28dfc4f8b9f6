import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { parseAdapterArgs } from "../src/adapter.js";
import { readPng } from "../src/png.js";
import { ADAPTER_JS, FIXTURE_DIR, run, ServerClient } from "./util.js";

const workDir = mkdtempSync(join(tmpdir(), "adapter-test-"));
afterAll(() => rmSync(workDir, { recursive: true, force: true }));

const LR = join(FIXTURE_DIR, "noise-16x12-x2-lr.png");

describe("argument parsing", () => {
  it("defaults to server mode with byte255 range", () => {
    const args = parseAdapterArgs(["--backend", "identity"]);
    expect(args.backend.name).toBe("identity");
    expect(args.mode).toBe("server");
    expect(args.inputRange).toBe("byte255");
  });

  it("requires a backend", () => {
    expect(() => parseAdapterArgs([])).toThrow(/--backend is required/);
  });

  it("rejects unknown backends, modes, and ranges", () => {
    expect(() => parseAdapterArgs(["--backend", "espcn"])).toThrow(/unknown backend/);
    expect(() => parseAdapterArgs(["--backend", "identity", "--mode", "daemon"])).toThrow(
      /unknown mode/,
    );
    expect(() =>
      parseAdapterArgs(["--backend", "identity", "--input-range", "percent"]),
    ).toThrow(/unknown input range/);
  });

  it("requires a shell template to name both files", () => {
    expect(() => parseAdapterArgs(["--backend", "shell"])).toThrow(/command template/);
    expect(() => parseAdapterArgs(["--backend", "shell", "--", "true"])).toThrow(/\{input\}/);
    expect(() =>
      parseAdapterArgs(["--backend", "shell", "--", "cp", "{input}", "/tmp/out.png"]),
    ).toThrow(/\{output\}/);
  });

  it("rejects a template for pixel backends and bad scales", () => {
    expect(() => parseAdapterArgs(["--backend", "identity", "--", "cp"])).toThrow(
      /only makes sense/,
    );
    expect(() => parseAdapterArgs(["--backend", "identity", "--scale", "two"])).toThrow(
      /positive integer/,
    );
  });
});

describe("command mode", () => {
  it("upscales one image and exits 0", async () => {
    const outPath = join(workDir, "cmd-ok.png");
    const result = await run("node", [
      ADAPTER_JS,
      "--backend",
      "identity",
      "--mode",
      "command",
      "--input",
      LR,
      "--output",
      outPath,
      "--scale",
      "1",
    ]);
    expect(result.code).toBe(0);
    const input = readPng(LR);
    const output = readPng(outPath);
    expect(Array.from(output.data)).toEqual(Array.from(input.data));
  });

  it("exits 1 with a diagnostic when the input is unreadable", async () => {
    const result = await run("node", [
      ADAPTER_JS,
      "--backend",
      "identity",
      "--mode",
      "command",
      "--input",
      join(workDir, "missing.png"),
      "--output",
      join(workDir, "never.png"),
      "--scale",
      "1",
    ]);
    expect(result.code).toBe(1);
    expect(result.stderr).toMatch(/adapter:/);
  });

  it("exits 2 on usage errors", async () => {
    const result = await run("node", [ADAPTER_JS, "--backend", "no-such-backend"]);
    expect(result.code).toBe(2);
    expect(result.stderr).toMatch(/unknown backend/);
  });

  it("requires input, output, and scale", async () => {
    const result = await run("node", [ADAPTER_JS, "--backend", "identity", "--mode", "command"]);
    expect(result.code).toBe(1);
    expect(result.stderr).toMatch(/requires --input/);
  });

  it("produces near-identical output in unit01 range", async () => {
    const bytePath = join(workDir, "range-byte.png");
    const unitPath = join(workDir, "range-unit.png");
    for (const [range, outPath] of [
      ["byte255", bytePath],
      ["unit01", unitPath],
    ] as const) {
      const result = await run("node", [
        ADAPTER_JS,
        "--backend",
        "bicubic",
        "--mode",
        "command",
        "--input-range",
        range,
        "--input",
        LR,
        "--output",
        outPath,
        "--scale",
        "2",
      ]);
      expect(result.code).toBe(0);
    }
    const byteImage = readPng(bytePath);
    const unitImage = readPng(unitPath);
    for (let i = 0; i < byteImage.data.length; i += 1) {
      expect(Math.abs(byteImage.data[i]! - unitImage.data[i]!)).toBeLessThanOrEqual(1);
    }
  });
});

describe("server mode protocol", () => {
  it("answers requests, names missing fields, and survives errors", async () => {
    const client = new ServerClient("node", [ADAPTER_JS, "--backend", "identity"]);
    try {
      const hello = await client.request({ id: "hello", echo: true });
      expect(hello).toEqual({ id: "hello", status: "ok" });

      const outPath = join(workDir, "server-ok.png");
      const ok = await client.request({ id: 1, input: LR, output: outPath, scale: 1 });
      expect(ok["status"]).toBe("ok");
      expect(readPng(outPath).width).toBe(16);

      const noScale = await client.request({ id: 2, input: LR, output: outPath });
      expect(noScale["status"]).toBe("error");
      expect(String(noScale["message"])).toContain("scale");

      const noInput = await client.request({ id: 3, output: outPath, scale: 1 });
      expect(noInput["status"]).toBe("error");
      expect(String(noInput["message"])).toContain("input");

      const badFile = await client.request({
        id: 4,
        input: join(workDir, "absent.png"),
        output: outPath,
        scale: 1,
      });
      expect(badFile["status"]).toBe("error");
      expect(String(badFile["message"])).not.toBe("");

      const still = await client.request({ id: 5, echo: true });
      expect(still["status"]).toBe("ok");

      const exit = await client.end();
      expect(exit.code).toBe(0);
    } finally {
      client.kill();
    }
  });

  it("ignores garbage lines with a stderr diagnostic", async () => {
    const client = new ServerClient("node", [ADAPTER_JS, "--backend", "identity"]);
    try {
      client.sendRaw("not a request");
      const reply = await client.request({ id: "after", echo: true });
      expect(reply["status"]).toBe("ok");
      const exit = await client.end();
      expect(exit.code).toBe(0);
      expect(client.stderrText).toContain("unparseable");
    } finally {
      client.kill();
    }
  });

  it("wraps a shell command per request", async () => {
    const client = new ServerClient("node", [
      ADAPTER_JS,
      "--backend",
      "shell",
      "--",
      "cp",
      "{input}",
      "{output}",
    ]);
    try {
      const outPath = join(workDir, "shell-copy.png");
      const reply = await client.request({ id: 9, input: LR, output: outPath, scale: 1 });
      expect(reply["status"]).toBe("ok");
      expect(Array.from(readPng(outPath).data)).toEqual(Array.from(readPng(LR).data));

      const failing = await client.request({
        id: 10,
        input: join(workDir, "absent.png"),
        output: join(workDir, "shell-fail.png"),
        scale: 1,
      });
      expect(failing["status"]).toBe("error");
      expect(String(failing["message"])).toMatch(/exited with code/);

      const exit = await client.end();
      expect(exit.code).toBe(0);
    } finally {
      client.kill();
    }
  });

  it("reports commands that exit 0 without writing output", async () => {
    const client = new ServerClient("node", [
      ADAPTER_JS,
      "--backend",
      "shell",
      "--",
      "true",
      "{input}",
      "{output}",
    ]);
    try {
      const reply = await client.request({
        id: 11,
        input: LR,
        output: join(workDir, "never-written.png"),
        scale: 1,
      });
      expect(reply["status"]).toBe("error");
      expect(String(reply["message"])).toContain("no output file");
    } finally {
      client.kill();
    }
  });
});
