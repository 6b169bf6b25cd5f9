/**
 * Minimal YUV4MPEG2 (.y4m) reader.
 *
 * The adapter consumes the uncompressed Y4M interchange format; transcode
 * arbitrary codecs first (`ffmpeg -i input.mp4 -pix_fmt yuv420p out.y4m`),
 * mirroring the pipeline's own pre-processing stage that normalizes every
 * video to a standard decoding format.
 */

import { openSync, readSync, closeSync } from "node:fs";
import type { Frame } from "./types.js";

export interface Y4mHeader {
  width: number;
  height: number;
  fpsNum: number;
  fpsDen: number;
  colorspace: string;
}

export class Y4mError extends Error {}

const HEADER_LIMIT = 512;

function parseHeader(line: string): Y4mHeader {
  if (!line.startsWith("YUV4MPEG2")) {
    throw new Y4mError("not a YUV4MPEG2 stream");
  }
  let width = 0;
  let height = 0;
  let fpsNum = 0;
  let fpsDen = 1;
  let colorspace = "C420";
  for (const token of line.split(" ").slice(1)) {
    if (!token) continue;
    const tag = token[0];
    const rest = token.slice(1);
    if (tag === "W") width = parseInt(rest, 10);
    else if (tag === "H") height = parseInt(rest, 10);
    else if (tag === "F") {
      const [num, den] = rest.split(":");
      fpsNum = parseInt(num, 10);
      fpsDen = parseInt(den ?? "1", 10);
    } else if (tag === "C") colorspace = token;
  }
  if (!(width > 0) || !(height > 0)) {
    throw new Y4mError(`invalid frame dimensions ${width}x${height}`);
  }
  if (width % 2 !== 0 || height % 2 !== 0) {
    throw new Y4mError("4:2:0 streams need even dimensions");
  }
  if (!(fpsNum > 0) || !(fpsDen > 0)) {
    throw new Y4mError("missing or invalid frame rate (F tag)");
  }
  if (!colorspace.startsWith("C420")) {
    throw new Y4mError(`unsupported colorspace ${colorspace}; use yuv420p`);
  }
  return { width, height, fpsNum, fpsDen, colorspace };
}

export class Y4mReader {
  readonly header: Y4mHeader;
  readonly fps: number;
  private fd: number;
  private offset: number;
  private frameBytes: number;

  constructor(path: string) {
    this.fd = openSync(path, "r");
    const head = Buffer.alloc(HEADER_LIMIT);
    const got = readSync(this.fd, head, 0, HEADER_LIMIT, 0);
    const nl = head.subarray(0, got).indexOf(0x0a);
    if (nl < 0) {
      closeSync(this.fd);
      throw new Y4mError("missing stream header line");
    }
    try {
      this.header = parseHeader(head.subarray(0, nl).toString("ascii"));
    } catch (err) {
      closeSync(this.fd);
      throw err;
    }
    this.fps = this.header.fpsNum / this.header.fpsDen;
    this.offset = nl + 1;
    const { width, height } = this.header;
    this.frameBytes = width * height + 2 * ((width / 2) * (height / 2));
  }

  /** Read the next frame, or null at end of stream. */
  next(): Frame | null {
    const mark = Buffer.alloc(6);
    const got = readSync(this.fd, mark, 0, 6, this.offset);
    if (got === 0) return null;
    if (got < 6 || mark.toString("ascii") !== "FRAME\n") {
      // frame headers may carry parameters up to a newline
      if (mark.subarray(0, 5).toString("ascii") !== "FRAME") {
        throw new Y4mError(`corrupt frame marker at byte ${this.offset}`);
      }
      const probe = Buffer.alloc(128);
      const probeGot = readSync(this.fd, probe, 0, 128, this.offset);
      const nl = probe.subarray(0, probeGot).indexOf(0x0a);
      if (nl < 0) throw new Y4mError(`unterminated frame header at byte ${this.offset}`);
      this.offset += nl + 1;
    } else {
      this.offset += 6;
    }
    const data = Buffer.alloc(this.frameBytes);
    const read = readSync(this.fd, data, 0, this.frameBytes, this.offset);
    if (read < this.frameBytes) {
      throw new Y4mError("truncated frame payload");
    }
    this.offset += this.frameBytes;
    const { width, height } = this.header;
    const ySize = width * height;
    const cSize = (width / 2) * (height / 2);
    return {
      width,
      height,
      y: new Uint8Array(data.subarray(0, ySize)),
      cb: new Uint8Array(data.subarray(ySize, ySize + cSize)),
      cr: new Uint8Array(data.subarray(ySize + cSize, ySize + 2 * cSize)),
    };
  }

  close(): void {
    closeSync(this.fd);
  }
}
