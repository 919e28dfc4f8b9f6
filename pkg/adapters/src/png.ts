/**
 * PNG exchange format: 8-bit files decoded into planar float pixels.
 *
 * Images cross the harness boundary as PNG files; in memory the adapters
 * work on channel-major float arrays (index `c*H*W + y*W + x`), which keeps
 * the resampling math identical to the harness's own layout.  Grayscale
 * files decode to one channel and are written back as grayscale, so an
 * adapter never changes the channel count the harness sees.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { PNG } from "pngjs";

export interface PlanarImage {
  width: number;
  height: number;
  channels: number;
  /** Channel-major pixel data in [0, 255] (or [0, 1] under unit01 handling). */
  data: Float64Array;
}

/** Round half away from zero and clamp to the 8-bit range. */
export function quantizeLevel(value: number): number {
  const clamped = Math.min(255, Math.max(0, value));
  return Math.floor(clamped + 0.5);
}

export function readPng(path: string): PlanarImage {
  const png = PNG.sync.read(readFileSync(path));
  const { width, height, data } = png;
  const planeSize = width * height;
  // pngjs always inflates to RGBA; `color` records whether the file itself
  // carried color planes (color types 2/3/6) or was grayscale (0/4).
  const channels = png.color ? 3 : 1;
  const planes = new Float64Array(channels * planeSize);
  for (let i = 0; i < planeSize; i++) {
    const rgba = i * 4;
    planes[i] = data[rgba]!;
    if (channels === 3) {
      planes[planeSize + i] = data[rgba + 1]!;
      planes[2 * planeSize + i] = data[rgba + 2]!;
    }
  }
  return { width, height, channels, data: planes };
}

export function writePng(path: string, image: PlanarImage): void {
  const { width, height, channels, data } = image;
  if (channels !== 1 && channels !== 3) {
    throw new Error(`cannot encode ${channels}-channel image; expected 1 or 3`);
  }
  const png = new PNG({ width, height });
  const planeSize = width * height;
  for (let i = 0; i < planeSize; i++) {
    const rgba = i * 4;
    const r = quantizeLevel(data[i]!);
    const g = channels === 3 ? quantizeLevel(data[planeSize + i]!) : r;
    const b = channels === 3 ? quantizeLevel(data[2 * planeSize + i]!) : r;
    png.data[rgba] = r;
    png.data[rgba + 1] = g;
    png.data[rgba + 2] = b;
    png.data[rgba + 3] = 255;
  }
  writeFileSync(path, PNG.sync.write(png, { colorType: channels === 3 ? 2 : 0 }));
}
