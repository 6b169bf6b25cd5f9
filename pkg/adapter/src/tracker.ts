/**
 * Correlation tracker: normalized cross-correlation template search with
 * peak-to-sidelobe-ratio confidence.
 *
 * The tracker initializes on the first confidently detected face, searches
 * a local window each frame and reports the PSR of the correlation
 * surface as its quality score (healthy locks sit well above 10; the
 * engine's conventional floor is 7). When the PSR collapses the tracker
 * deactivates and waits for a fresh face detection to re-initialize.
 */

import { sampleCrop } from "./image.js";
import type { Box, Frame, TrackerReading } from "./types.js";

const TEMPLATE = 32;
// the correlation shoulder of a face-sized target spans several pixels, so
// sidelobe statistics start well outside it; sized for 50-150 px faces
const SEARCH_RADIUS = 20;
const PEAK_EXCLUSION = 7;
const MIN_ACTIVE_PSR = 5.0;
const TEMPLATE_BLEND = 0.08;

function normalize(patch: Float64Array): Float64Array {
  let mean = 0;
  for (const v of patch) mean += v;
  mean /= patch.length;
  let norm = 0;
  const out = new Float64Array(patch.length);
  for (let i = 0; i < patch.length; i++) {
    out[i] = patch[i] - mean;
    norm += out[i] * out[i];
  }
  norm = Math.sqrt(norm) || 1;
  for (let i = 0; i < out.length; i++) out[i] /= norm;
  return out;
}

export class CorrelationTracker {
  private template: Float64Array | null = null;
  private box: Box | null = null;
  private lastPsr = 0;

  get initialized(): boolean {
    return this.template !== null;
  }

  start(frame: Frame, box: Box): void {
    this.box = { ...box };
    this.template = normalize(sampleCrop(frame.y, frame.width, frame.height, box, TEMPLATE));
    this.lastPsr = MIN_ACTIVE_PSR;
  }

  /** Track into the next frame; returns the state to report for it. */
  update(frame: Frame): TrackerReading {
    if (!this.template || !this.box) {
      return { box: null, confidence: 0, active: false };
    }
    const span = 2 * SEARCH_RADIUS + 1;
    const scores = new Float64Array(span * span);
    let best = -Infinity;
    let bestIdx = 0;
    for (let dy = -SEARCH_RADIUS; dy <= SEARCH_RADIUS; dy++) {
      for (let dx = -SEARCH_RADIUS; dx <= SEARCH_RADIUS; dx++) {
        const candidate: Box = {
          x: this.box.x + dx,
          y: this.box.y + dy,
          w: this.box.w,
          h: this.box.h,
        };
        const patch = normalize(
          sampleCrop(frame.y, frame.width, frame.height, candidate, TEMPLATE)
        );
        let score = 0;
        for (let i = 0; i < patch.length; i++) score += patch[i] * this.template[i];
        const idx = (dy + SEARCH_RADIUS) * span + (dx + SEARCH_RADIUS);
        scores[idx] = score;
        if (score > best) {
          best = score;
          bestIdx = idx;
        }
      }
    }
    const peakX = bestIdx % span;
    const peakY = (bestIdx / span) | 0;
    let sum = 0;
    let sumSq = 0;
    let count = 0;
    for (let j = 0; j < span; j++) {
      for (let i = 0; i < span; i++) {
        if (Math.abs(i - peakX) <= PEAK_EXCLUSION && Math.abs(j - peakY) <= PEAK_EXCLUSION) {
          continue;
        }
        const v = scores[j * span + i];
        sum += v;
        sumSq += v * v;
        count += 1;
      }
    }
    const mean = sum / count;
    const variance = Math.max(sumSq / count - mean * mean, 1e-12);
    const psr = (best - mean) / Math.sqrt(variance);
    this.lastPsr = psr;

    if (psr < MIN_ACTIVE_PSR) {
      // lock lost: deactivate and wait for a detection to restart
      this.template = null;
      this.box = null;
      return { box: null, confidence: Math.max(psr, 0), active: false };
    }

    const moved: Box = {
      x: Math.min(Math.max(this.box.x + (peakX - SEARCH_RADIUS), 0), frame.width - this.box.w),
      y: Math.min(Math.max(this.box.y + (peakY - SEARCH_RADIUS), 0), frame.height - this.box.h),
      w: this.box.w,
      h: this.box.h,
    };
    this.box = moved;
    const current = normalize(sampleCrop(frame.y, frame.width, frame.height, moved, TEMPLATE));
    for (let i = 0; i < this.template.length; i++) {
      this.template[i] = (1 - TEMPLATE_BLEND) * this.template[i] + TEMPLATE_BLEND * current[i];
    }
    return { box: { ...moved }, confidence: psr, active: true };
  }
}
