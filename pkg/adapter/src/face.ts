/**
 * Face detection and encoding without pretrained models.
 *
 * Faces are located by skin-chroma segmentation (the classic Cb/Cr box) on
 * the half-resolution chroma planes; each accepted component yields a
 * 128-d encoding built from an 8x8 grid of normalized luma means plus an
 * 8x8 grid of gradient-energy means over the face crop, centered and
 * unit-normalized. Head pose is estimated from the skin-mass asymmetry
 * inside the box. Crude next to a learned embedder, but deterministic,
 * self-contained and stable across frames of a static subject.
 */

import { clampBox, connectedComponents, sampleCrop } from "./image.js";
import type { Box, FaceDetection, Frame } from "./types.js";

const CB_MIN = 77;
const CB_MAX = 127;
const CR_MIN = 133;
const CR_MAX = 173;
const MAX_FACES = 4;
const PATCH = 24; // sampled crop edge; 3x3 blocks reduce to the 8x8 grids

export function skinMask(frame: Frame): Uint8Array {
  const n = frame.cb.length;
  const mask = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    const cb = frame.cb[i];
    const cr = frame.cr[i];
    mask[i] = cb >= CB_MIN && cb <= CB_MAX && cr >= CR_MIN && cr <= CR_MAX ? 1 : 0;
  }
  return mask;
}

function encode(frame: Frame, box: Box): number[] {
  const patch = sampleCrop(frame.y, frame.width, frame.height, box, PATCH);
  const features = new Float64Array(128);
  const block = PATCH / 8;
  for (let bj = 0; bj < 8; bj++) {
    for (let bi = 0; bi < 8; bi++) {
      let mean = 0;
      let grad = 0;
      for (let j = bj * block; j < (bj + 1) * block; j++) {
        for (let i = bi * block; i < (bi + 1) * block; i++) {
          const v = patch[j * PATCH + i];
          mean += v;
          const right = i + 1 < PATCH ? patch[j * PATCH + i + 1] : v;
          const down = j + 1 < PATCH ? patch[(j + 1) * PATCH + i] : v;
          grad += Math.abs(right - v) + Math.abs(down - v);
        }
      }
      const cells = block * block;
      features[bj * 8 + bi] = mean / cells / 255;
      features[64 + bj * 8 + bi] = grad / cells / 255;
    }
  }
  let avg = 0;
  for (const v of features) avg += v;
  avg /= features.length;
  let norm = 0;
  for (let i = 0; i < features.length; i++) {
    features[i] -= avg;
    norm += features[i] * features[i];
  }
  norm = Math.sqrt(norm);
  const out = new Array<number>(128);
  for (let i = 0; i < 128; i++) {
    out[i] = norm > 1e-9 ? features[i] / norm : 0;
  }
  return out;
}

export function detectFaces(frame: Frame): FaceDetection[] {
  const cw = frame.width / 2;
  const ch = frame.height / 2;
  const mask = skinMask(frame);
  const minArea = Math.max(40, Math.floor(cw * ch * 0.003));
  const faces: FaceDetection[] = [];
  const components = connectedComponents(mask, cw, ch)
    .filter((c) => c.area >= minArea)
    .sort((a, b) => b.area - a.area);
  for (const comp of components.slice(0, MAX_FACES)) {
    const bw = comp.maxX - comp.minX + 1;
    const bh = comp.maxY - comp.minY + 1;
    const aspect = bh / bw;
    if (aspect < 0.6 || aspect > 2.5) continue;
    const fill = comp.area / (bw * bh);
    if (fill < 0.4) continue;
    const box = clampBox(
      { x: comp.minX * 2, y: comp.minY * 2, w: bw * 2, h: bh * 2 },
      frame.width,
      frame.height
    );
    // pose from skin-mass asymmetry: a turned head shifts mass off-center
    const cx = comp.sumX / comp.area;
    const cy = comp.sumY / comp.area;
    const offX = (cx - (comp.minX + bw / 2)) / (bw / 2);
    const offY = (cy - (comp.minY + bh / 2)) / (bh / 2);
    const yaw = Math.max(-85, Math.min(85, offX * 70));
    const pitch = Math.max(-85, Math.min(85, offY * 50));
    faces.push({
      box,
      encoding: encode(frame, box),
      yawDeg: yaw,
      pitchDeg: pitch,
      quality: fill,
    });
  }
  return faces;
}
