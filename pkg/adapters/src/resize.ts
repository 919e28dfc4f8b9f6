/**
 * Bicubic resampling that matches the harness's built-in kernel.
 *
 * Same math end to end: Keys cubic convolution with a = -0.5, sample
 * positions u = (i + 0.5) / scale - 0.5, kernel stretched by the scale
 * factor when downscaling (antialiasing), per-row weight normalization
 * before clamping source indices to the edge, and a separable width-pass
 * then height-pass evaluation in double precision.
 */

import { PlanarImage } from "./png.js";

const SUPPORT = 2.0;

function cubic(x: number): number {
  const ax = Math.abs(x);
  if (ax > 2.0) {
    return 0.0;
  }
  const ax2 = ax * ax;
  const ax3 = ax2 * ax;
  if (ax <= 1.0) {
    return 1.5 * ax3 - 2.5 * ax2 + 1.0;
  }
  return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
}

interface Contributions {
  taps: number;
  /** Clamped source indices, shaped [outSize][taps]. */
  indices: Int32Array;
  /** Normalized weights, shaped [outSize][taps]. */
  weights: Float64Array;
}

function contributions(inSize: number, outSize: number, antialias: boolean): Contributions {
  const scale = outSize / inSize;
  const shrink = antialias && scale < 1.0;
  const kscale = shrink ? scale : 1.0;
  const halfWidth = shrink ? SUPPORT / scale : SUPPORT;
  const taps = Math.ceil(2.0 * halfWidth) + 2;
  const indices = new Int32Array(outSize * taps);
  const weights = new Float64Array(outSize * taps);
  for (let i = 0; i < outSize; i++) {
    const u = (i + 0.5) / scale - 0.5;
    const left = Math.floor(u - halfWidth);
    let sum = 0.0;
    for (let t = 0; t < taps; t++) {
      const w = kscale * cubic(kscale * (u - (left + t)));
      weights[i * taps + t] = w;
      sum += w;
    }
    for (let t = 0; t < taps; t++) {
      weights[i * taps + t]! /= sum;
      const src = left + t;
      indices[i * taps + t] = src < 0 ? 0 : src >= inSize ? inSize - 1 : src;
    }
  }
  return { taps, indices, weights };
}

export function resizeBicubic(
  image: PlanarImage,
  outWidth: number,
  outHeight: number,
  antialias = true,
): PlanarImage {
  if (outWidth < 1 || outHeight < 1) {
    throw new Error(`output size must be >= 1, got ${outWidth}x${outHeight}`);
  }
  const { width: inW, height: inH, channels } = image;

  // Width pass: (C, inH, inW) -> (C, inH, outW).
  const wPass = contributions(inW, outWidth, antialias);
  const mid = new Float64Array(channels * inH * outWidth);
  for (let c = 0; c < channels; c++) {
    const srcPlane = c * inH * inW;
    const midPlane = c * inH * outWidth;
    for (let y = 0; y < inH; y++) {
      const srcRow = srcPlane + y * inW;
      const midRow = midPlane + y * outWidth;
      for (let x = 0; x < outWidth; x++) {
        let acc = 0.0;
        const base = x * wPass.taps;
        for (let t = 0; t < wPass.taps; t++) {
          acc += image.data[srcRow + wPass.indices[base + t]!]! * wPass.weights[base + t]!;
        }
        mid[midRow + x] = acc;
      }
    }
  }

  // Height pass: (C, inH, outW) -> (C, outH, outW).
  const hPass = contributions(inH, outHeight, antialias);
  const out = new Float64Array(channels * outHeight * outWidth);
  for (let c = 0; c < channels; c++) {
    const midPlane = c * inH * outWidth;
    const outPlane = c * outHeight * outWidth;
    for (let y = 0; y < outHeight; y++) {
      const outRow = outPlane + y * outWidth;
      const base = y * hPass.taps;
      for (let x = 0; x < outWidth; x++) {
        let acc = 0.0;
        for (let t = 0; t < hPass.taps; t++) {
          acc += mid[midPlane + hPass.indices[base + t]! * outWidth + x]! * hPass.weights[base + t]!;
        }
        out[outRow + x] = acc;
      }
    }
  }

  return { width: outWidth, height: outHeight, channels, data: out };
}
