/** Frame-record JSONL serialization, bit-compatible with the engine parser. */

import type { FrameRecordJson } from "./types.js";

function assertFinite(value: number, name: string): void {
  if (!Number.isFinite(value)) {
    throw new Error(`${name} is not finite: ${value}`);
  }
}

/**
 * Serialize one record as a single JSON line. Numbers go through
 * JSON.stringify, i.e. shortest round-trip decimal form, so any
 * IEEE-754 reader recovers the exact doubles.
 */
export function recordToLine(record: FrameRecordJson): string {
  assertFinite(record.t, "timestamp");
  for (const face of record.faces) {
    if (face.enc.length !== 128) {
      throw new Error(`encoding length must be 128, got ${face.enc.length}`);
    }
    face.enc.forEach((v, i) => assertFinite(v, `encoding[${i}]`));
    assertFinite(face.yaw, "yaw");
    assertFinite(face.pitch, "pitch");
  }
  for (const obj of record.objects) {
    assertFinite(obj.conf, "object confidence");
  }
  assertFinite(record.tracker.conf, "tracker confidence");
  return JSON.stringify(record);
}
