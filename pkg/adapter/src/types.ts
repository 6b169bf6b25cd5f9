/** Shared types for the extraction pipeline. */

/** One decoded frame in planar YCbCr 4:2:0 layout. */
export interface Frame {
  width: number;
  height: number;
  /** Luma plane, width * height bytes. */
  y: Uint8Array;
  /** Chroma planes at half resolution, (width/2) * (height/2) bytes each. */
  cb: Uint8Array;
  cr: Uint8Array;
}

export interface AdapterConfig {
  targetFps: number;
  targetWidthPx: number;
  faceBackend: "hog" | "cnn";
}

export const DEFAULT_CONFIG: AdapterConfig = {
  targetFps: 3,
  targetWidthPx: 400,
  faceBackend: "hog",
};

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface FaceDetection {
  box: Box;
  encoding: number[];
  yawDeg: number;
  pitchDeg: number;
  /** Segmentation fill ratio in [0, 1]; how cleanly the face separated. */
  quality: number;
}

export interface ObjectDetection {
  cls: "body" | "phone" | "laptop";
  box: Box;
  confidence: number;
}

export interface TrackerReading {
  box: Box | null;
  confidence: number;
  active: boolean;
}

/** One line of the frame-record stream consumed by the analysis engine. */
export interface FrameRecordJson {
  index: number;
  t: number;
  w: number;
  h: number;
  faces: { box: [number, number, number, number]; enc: number[]; yaw: number; pitch: number }[];
  objects: { cls: string; box: [number, number, number, number]; conf: number }[];
  tracker: { box: [number, number, number, number] | null; conf: number; active: boolean };
}
