/**
 * Video-to-detection-stream pipeline: decode, resample to the target
 * fps/width, run the face/body/device detectors and the correlation
 * tracker, and emit one frame record per sampled frame.
 *
 * The adapter emits raw observations only -- no thresholding and no
 * temporal linking -- so every decision stays in the analysis engine and
 * thresholds remain centrally configurable.
 */

import { createWriteStream } from "node:fs";
import { once } from "node:events";

import { detectFaces } from "./face.js";
import { resizeFrame } from "./image.js";
import { bodyFromFace, detectDevices } from "./objects.js";
import { recordToLine } from "./records.js";
import { CorrelationTracker } from "./tracker.js";
import type { AdapterConfig, FrameRecordJson, ObjectDetection } from "./types.js";
import { DEFAULT_CONFIG } from "./types.js";
import { Y4mReader } from "./y4m.js";

export function* extractRecords(
  videoPath: string,
  config: Partial<AdapterConfig> = {}
): Generator<FrameRecordJson> {
  const cfg: AdapterConfig = { ...DEFAULT_CONFIG, ...config };
  if (!(cfg.targetFps > 0)) throw new Error(`target fps must be positive, got ${cfg.targetFps}`);
  if (!(cfg.targetWidthPx > 0)) {
    throw new Error(`target width must be positive, got ${cfg.targetWidthPx}`);
  }
  const reader = new Y4mReader(videoPath);
  const tracker = new CorrelationTracker();
  try {
    let sourceIndex = 0;
    let outIndex = 0;
    // output frame k corresponds to source timestamp k / targetFps
    let wanted = 0;
    for (let frame = reader.next(); frame !== null; frame = reader.next(), sourceIndex++) {
      while (sourceIndex === wanted) {
        const resized = resizeFrame(frame, cfg.targetWidthPx);
        const faces = detectFaces(resized);
        const objects: ObjectDetection[] = faces.map((face) =>
          bodyFromFace(resized, face, face.quality)
        );
        objects.push(...detectDevices(resized, faces));

        if (!tracker.initialized && faces.length > 0) {
          tracker.start(resized, faces[0].box);
        }
        const reading = tracker.initialized
          ? tracker.update(resized)
          : { box: null, confidence: 0, active: false };
        if (!reading.active && faces.length > 0) {
          // lock lost this frame; restart from the freshest detection
          tracker.start(resized, faces[0].box);
        }

        yield {
          index: outIndex,
          t: outIndex / cfg.targetFps,
          w: resized.width,
          h: resized.height,
          faces: faces.map((f) => ({
            box: [f.box.x, f.box.y, f.box.w, f.box.h],
            enc: f.encoding,
            yaw: f.yawDeg,
            pitch: f.pitchDeg,
          })),
          objects: objects.map((o) => ({
            cls: o.cls,
            box: [o.box.x, o.box.y, o.box.w, o.box.h],
            conf: o.confidence,
          })),
          tracker: {
            box: reading.box
              ? [reading.box.x, reading.box.y, reading.box.w, reading.box.h]
              : null,
            conf: Math.max(0, reading.confidence),
            active: reading.active,
          },
        };
        outIndex++;
        wanted = Math.round((outIndex * reader.fps) / cfg.targetFps);
      }
    }
  } finally {
    reader.close();
  }
}

export async function extractToFile(
  videoPath: string,
  outPath: string,
  config: Partial<AdapterConfig> = {}
): Promise<number> {
  const sink = createWriteStream(outPath, { encoding: "utf-8" });
  let count = 0;
  for (const record of extractRecords(videoPath, config)) {
    if (!sink.write(recordToLine(record) + "\n")) {
      await once(sink, "drain");
    }
    count++;
  }
  sink.end();
  await once(sink, "finish");
  return count;
}
