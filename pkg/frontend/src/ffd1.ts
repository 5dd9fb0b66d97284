import type { DistanceMap } from "./types.js";

/** Decode an FFD1 blob: magic "FFD1", u32-LE width/height, f32-LE row-major. */
export function decodeFfd1(buffer: ArrayBuffer): DistanceMap {
  const view = new DataView(buffer);
  if (buffer.byteLength < 12) throw new Error("truncated FFD1 header");
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3));
  if (magic !== "FFD1") throw new Error(`bad FFD1 magic ${magic}`);
  const width = view.getUint32(4, true);
  const height = view.getUint32(8, true);
  const expected = 12 + 4 * width * height;
  if (buffer.byteLength !== expected) {
    throw new Error(`FFD1 size mismatch: have ${buffer.byteLength}, need ${expected}`);
  }
  const values = new Float32Array(width * height);
  for (let i = 0; i < values.length; i++) {
    values[i] = view.getFloat32(12 + 4 * i, true);
  }
  return { width, height, values };
}
