/**
 * Synthetic Y4M clip generator for tests and demos.
 *
 * Paints a skin-toned elliptical face with eye/mouth luma structure on a
 * gradient background, optionally holding up a dark phone-shaped
 * rectangle during scripted intervals. Everything is deterministic.
 */

import { writeFileSync } from "node:fs";

export interface ClipSpec {
  durationSec: number;
  fps: number;
  width: number;
  height: number;
  /** Seconds during which a phone-like rectangle is visible. */
  phoneIntervals?: [number, number][];
  /** Omit the face entirely (for registration-failure scenarios). */
  faceless?: boolean;
}

const SKIN_CB = 105;
const SKIN_CR = 150;

export function writeSyntheticClip(path: string, spec: ClipSpec): number {
  const { width: w, height: h, fps } = spec;
  if (w % 2 !== 0 || h % 2 !== 0) {
    throw new Error("clip dimensions must be even for 4:2:0");
  }
  const frames = Math.round(spec.durationSec * fps);
  const ySize = w * h;
  const cSize = (w / 2) * (h / 2);

  const cx = w * 0.5;
  const cy = h * 0.42;
  const rx = w * 0.09;
  const ry = h * 0.16;
  const eyeR = Math.max(2, rx * 0.18);

  const yPlane = new Uint8Array(ySize);
  const cbPlane = new Uint8Array(cSize);
  const crPlane = new Uint8Array(cSize);

  const paintBase = () => {
    for (let j = 0; j < h; j++) {
      const shade = 105 + Math.round((j / h) * 25);
      yPlane.fill(shade, j * w, (j + 1) * w);
    }
    cbPlane.fill(128);
    crPlane.fill(128);
    if (spec.faceless) return;
    for (let j = 0; j < h; j++) {
      for (let i = 0; i < w; i++) {
        const dx = (i - cx) / rx;
        const dy = (j - cy) / ry;
        if (dx * dx + dy * dy <= 1) {
          let v = 175;
          const exL = (i - (cx - rx * 0.42)) / eyeR;
          const exR = (i - (cx + rx * 0.42)) / eyeR;
          const ey = (j - (cy - ry * 0.22)) / eyeR;
          if (exL * exL + ey * ey <= 1 || exR * exR + ey * ey <= 1) v = 65;
          if (Math.abs(j - (cy + ry * 0.5)) < ry * 0.08 && Math.abs(i - cx) < rx * 0.45) v = 80;
          yPlane[j * w + i] = v;
        }
      }
    }
    const cw = w / 2;
    const ch = h / 2;
    for (let j = 0; j < ch; j++) {
      for (let i = 0; i < cw; i++) {
        const dx = (i * 2 - cx) / rx;
        const dy = (j * 2 - cy) / ry;
        if (dx * dx + dy * dy <= 1) {
          cbPlane[j * cw + i] = SKIN_CB;
          crPlane[j * cw + i] = SKIN_CR;
        }
      }
    }
  };

  const paintPhone = () => {
    const px = Math.round(w * 0.72);
    const py = Math.round(h * 0.55);
    const pw = Math.round(w * 0.09);
    const ph = Math.round(h * 0.2);
    for (let j = py; j < py + ph && j < h; j++) {
      yPlane.fill(25, j * w + px, j * w + Math.min(px + pw, w));
    }
    const cw = w / 2;
    for (let j = py >> 1; j < (py + ph) >> 1; j++) {
      for (let i = px >> 1; i < (px + pw) >> 1; i++) {
        cbPlane[j * cw + i] = 135;
        crPlane[j * cw + i] = 120;
      }
    }
  };

  const chunks: Buffer[] = [Buffer.from(`YUV4MPEG2 W${w} H${h} F${fps}:1 Ip A1:1 C420mpeg2\n`)];
  const marker = Buffer.from("FRAME\n");
  for (let f = 0; f < frames; f++) {
    const t = f / fps;
    paintBase();
    if ((spec.phoneIntervals ?? []).some(([s, e]) => t >= s && t < e)) {
      paintPhone();
    }
    chunks.push(marker, Buffer.from(yPlane), Buffer.from(cbPlane), Buffer.from(crPlane));
  }
  writeFileSync(path, Buffer.concat(chunks));
  return frames;
}
