/**
 * Inference backends the reference adapters can serve.
 *
 * Two shapes exist.  A pixel backend maps decoded pixels to pixels and the
 * serving loop handles all file I/O, so framework code never touches PNG.
 * A file backend is handed the input/output paths directly, which is what
 * the generic shell-command wrapper needs: the wrapped program does its own
 * image I/O and this process never decodes anything.
 */

import { spawn } from "node:child_process";
import { existsSync } from "node:fs";

import { PlanarImage } from "./png.js";
import { resizeBicubic } from "./resize.js";

export interface PixelBackend {
  kind: "pixel";
  name: string;
  run(image: PlanarImage, scale: number, peak: number): PlanarImage;
}

export interface FileBackend {
  kind: "file";
  name: string;
  run(inputPath: string, outputPath: string, scale: number): Promise<void>;
}

export type Backend = PixelBackend | FileBackend;

/** Returns the input unchanged; an 8-bit round trip is the whole model. */
export function identityBackend(): PixelBackend {
  return {
    kind: "pixel",
    name: "identity",
    run: (image) => image,
  };
}

/** Upscales with the same bicubic kernel the harness implements natively. */
export function bicubicBackend(): PixelBackend {
  return {
    kind: "pixel",
    name: "bicubic",
    run: (image, scale) => resizeBicubic(image, image.width * scale, image.height * scale),
  };
}

const PLACEHOLDERS = ["{input}", "{output}", "{scale}"] as const;

/**
 * Wraps any per-image command line as a backend.  Every occurrence of
 * {input}, {output}, and {scale} in the template is substituted per
 * request; the command must write the output PNG itself and exit 0.
 */
export function shellBackend(template: string[]): FileBackend {
  if (template.length === 0) {
    throw new Error("shell backend needs a command template after --");
  }
  const joined = template.join(" ");
  for (const required of ["{input}", "{output}"]) {
    if (!joined.includes(required)) {
      throw new Error(`shell command template must contain ${required}`);
    }
  }
  return {
    kind: "file",
    name: "shell",
    run: (inputPath, outputPath, scale) =>
      new Promise<void>((resolve, reject) => {
        const argv = template.map((part) =>
          part
            .replaceAll(PLACEHOLDERS[0], inputPath)
            .replaceAll(PLACEHOLDERS[1], outputPath)
            .replaceAll(PLACEHOLDERS[2], String(scale)),
        );
        // The wrapped command must never reach our protocol stdout.
        const child = spawn(argv[0]!, argv.slice(1), {
          stdio: ["ignore", "ignore", "pipe"],
        });
        let stderrTail = "";
        child.stderr.on("data", (chunk: Buffer) => {
          stderrTail = (stderrTail + chunk.toString("utf-8")).slice(-2000);
        });
        child.on("error", (err) => reject(new Error(`cannot run ${argv[0]}: ${err.message}`)));
        child.on("close", (code) => {
          if (code !== 0) {
            const detail = stderrTail.trim().split("\n").slice(-3).join(" | ");
            reject(new Error(`command exited with code ${code}${detail ? `: ${detail}` : ""}`));
          } else if (!existsSync(outputPath)) {
            reject(new Error(`command succeeded but wrote no output file ${outputPath}`));
          } else {
            resolve();
          }
        });
      }),
  };
}
