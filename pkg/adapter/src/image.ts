/** Plane resampling and crop helpers. */

import type { Box, Frame } from "./types.js";

function resizePlane(
  src: Uint8Array,
  sw: number,
  sh: number,
  dw: number,
  dh: number
): Uint8Array {
  const out = new Uint8Array(dw * dh);
  for (let j = 0; j < dh; j++) {
    const sj = Math.min(sh - 1, Math.floor((j * sh) / dh));
    const srcRow = sj * sw;
    const dstRow = j * dw;
    for (let i = 0; i < dw; i++) {
      const si = Math.min(sw - 1, Math.floor((i * sw) / dw));
      out[dstRow + i] = src[srcRow + si];
    }
  }
  return out;
}

/** Scale a frame to the target width, preserving aspect, even dimensions. */
export function resizeFrame(frame: Frame, targetWidth: number): Frame {
  if (frame.width === targetWidth) return frame;
  const scale = targetWidth / frame.width;
  let targetHeight = Math.round(frame.height * scale);
  if (targetHeight % 2 !== 0) targetHeight += 1;
  const cw = targetWidth / 2;
  const ch = targetHeight / 2;
  return {
    width: targetWidth,
    height: targetHeight,
    y: resizePlane(frame.y, frame.width, frame.height, targetWidth, targetHeight),
    cb: resizePlane(frame.cb, frame.width / 2, frame.height / 2, cw, ch),
    cr: resizePlane(frame.cr, frame.width / 2, frame.height / 2, cw, ch),
  };
}

/** Bilinear-sample a luma crop into a size x size patch of [0, 255] floats. */
export function sampleCrop(
  y: Uint8Array,
  width: number,
  height: number,
  box: Box,
  size: number
): Float64Array {
  const out = new Float64Array(size * size);
  for (let j = 0; j < size; j++) {
    const fy = box.y + ((j + 0.5) / size) * box.h - 0.5;
    const y0 = Math.max(0, Math.min(height - 1, Math.floor(fy)));
    const y1 = Math.min(height - 1, y0 + 1);
    const wy = Math.min(1, Math.max(0, fy - y0));
    for (let i = 0; i < size; i++) {
      const fx = box.x + ((i + 0.5) / size) * box.w - 0.5;
      const x0 = Math.max(0, Math.min(width - 1, Math.floor(fx)));
      const x1 = Math.min(width - 1, x0 + 1);
      const wx = Math.min(1, Math.max(0, fx - x0));
      const top = y[y0 * width + x0] * (1 - wx) + y[y0 * width + x1] * wx;
      const bot = y[y1 * width + x0] * (1 - wx) + y[y1 * width + x1] * wx;
      out[j * size + i] = top * (1 - wy) + bot * wy;
    }
  }
  return out;
}

/** Clamp a box to frame bounds, keeping at least 1 px of extent. */
export function clampBox(box: Box, width: number, height: number): Box {
  const x = Math.min(Math.max(box.x, 0), width - 1);
  const y = Math.min(Math.max(box.y, 0), height - 1);
  const w = Math.max(1, Math.min(box.w, width - x));
  const h = Math.max(1, Math.min(box.h, height - y));
  return { x, y, w, h };
}

export interface Component {
  area: number;
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
  sumX: number;
  sumY: number;
}

/** 4-connected components of a binary mask (iterative flood fill). */
export function connectedComponents(
  mask: Uint8Array,
  width: number,
  height: number
): Component[] {
  const visited = new Uint8Array(mask.length);
  const out: Component[] = [];
  const stack: number[] = [];
  for (let start = 0; start < mask.length; start++) {
    if (!mask[start] || visited[start]) continue;
    const comp: Component = {
      area: 0,
      minX: width,
      minY: height,
      maxX: 0,
      maxY: 0,
      sumX: 0,
      sumY: 0,
    };
    stack.push(start);
    visited[start] = 1;
    while (stack.length > 0) {
      const idx = stack.pop()!;
      const px = idx % width;
      const py = (idx / width) | 0;
      comp.area += 1;
      comp.sumX += px;
      comp.sumY += py;
      if (px < comp.minX) comp.minX = px;
      if (py < comp.minY) comp.minY = py;
      if (px > comp.maxX) comp.maxX = px;
      if (py > comp.maxY) comp.maxY = py;
      if (px > 0 && mask[idx - 1] && !visited[idx - 1]) {
        visited[idx - 1] = 1;
        stack.push(idx - 1);
      }
      if (px < width - 1 && mask[idx + 1] && !visited[idx + 1]) {
        visited[idx + 1] = 1;
        stack.push(idx + 1);
      }
      if (py > 0 && mask[idx - width] && !visited[idx - width]) {
        visited[idx - width] = 1;
        stack.push(idx - width);
      }
      if (py < height - 1 && mask[idx + width] && !visited[idx + width]) {
        visited[idx + width] = 1;
        stack.push(idx + width);
      }
    }
    out.push(comp);
  }
  return out;
}
