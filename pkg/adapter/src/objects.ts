/**
 * Body and device detection heuristics.
 *
 * The body box is anchored to a detected face (torso expansion), with
 * confidence derived from how cleanly the face region segmented. Devices
 * are found as dark, well-filled rectangular luma components away from
 * faces: compact ones report as phones, wide or large ones as laptops.
 */

import { clampBox, connectedComponents } from "./image.js";
import type { Box, FaceDetection, Frame, ObjectDetection } from "./types.js";

const DEVICE_LUMA_MAX = 55;
const DEVICE_MIN_AREA_FRAC = 0.0008;
const DEVICE_MAX_AREA_FRAC = 0.25;
const DEVICE_MIN_FILL = 0.6;

export function bodyFromFace(frame: Frame, face: FaceDetection, skinFill: number): ObjectDetection {
  const fb = face.box;
  const box = clampBox(
    { x: fb.x - fb.w * 0.6, y: fb.y + fb.h * 0.35, w: fb.w * 2.2, h: fb.h * 3.4 },
    frame.width,
    frame.height
  );
  const confidence = Math.min(0.95, 0.55 + 0.4 * skinFill);
  return { cls: "body", box, confidence };
}

function overlaps(a: Box, b: Box): boolean {
  const ix = Math.min(a.x + a.w, b.x + b.w) - Math.max(a.x, b.x);
  const iy = Math.min(a.y + a.h, b.y + b.h) - Math.max(a.y, b.y);
  if (ix <= 0 || iy <= 0) return false;
  return ix * iy > 0.3 * a.w * a.h;
}

export function detectDevices(frame: Frame, faces: FaceDetection[]): ObjectDetection[] {
  const { width, height, y } = frame;
  const mask = new Uint8Array(y.length);
  for (let i = 0; i < y.length; i++) {
    mask[i] = y[i] <= DEVICE_LUMA_MAX ? 1 : 0;
  }
  const frameArea = width * height;
  const out: ObjectDetection[] = [];
  for (const comp of connectedComponents(mask, width, height)) {
    if (comp.area < frameArea * DEVICE_MIN_AREA_FRAC) continue;
    if (comp.area > frameArea * DEVICE_MAX_AREA_FRAC) continue;
    const bw = comp.maxX - comp.minX + 1;
    const bh = comp.maxY - comp.minY + 1;
    const fill = comp.area / (bw * bh);
    if (fill < DEVICE_MIN_FILL) continue;
    const box = clampBox({ x: comp.minX, y: comp.minY, w: bw, h: bh }, width, height);
    if (faces.some((f) => overlaps(box, f.box))) continue;
    const laptopLike = bw / bh > 1.3 || comp.area > frameArea * 0.03;
    out.push({
      cls: laptopLike ? "laptop" : "phone",
      box,
      confidence: Math.min(0.95, 0.35 + 0.55 * fill),
    });
  }
  return out.sort((a, b) => b.confidence - a.confidence).slice(0, 4);
}
