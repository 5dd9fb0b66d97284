import type { ContourJson, DistanceMap } from "./types.js";

// label palette mirrors the server's indexed-PNG palette
export const LABEL_COLORS: Array<[number, number, number]> = [
  [0, 0, 0], [31, 119, 180], [44, 160, 44], [214, 39, 40], [255, 127, 14],
  [148, 103, 189], [140, 86, 75], [227, 119, 194], [127, 127, 127],
  [188, 189, 34], [23, 190, 207],
];

export interface ContourPath {
  label: number;
  points: Array<[number, number]>;
  closed: boolean;
}

/**
 * Contours as drawable paths. Coordinates are passed through verbatim -- the
 * displayed geometry must be exactly what the service returned.
 */
export function contoursToPaths(contours: ContourJson[]): ContourPath[] {
  return contours.map((c) => ({ label: c.label, points: c.points, closed: c.closed }));
}

/** RGBA overlay for a heat rendering of a distance map; +inf is transparent. */
export function distanceHeatRgba(map: DistanceMap, alpha = 160): Uint8ClampedArray {
  const out = new Uint8ClampedArray(map.width * map.height * 4);
  let top = 0;
  for (const v of map.values) {
    if (Number.isFinite(v) && v > top) top = v;
  }
  const scale = top > 0 ? 1 / top : 0;
  for (let i = 0; i < map.values.length; i++) {
    const v = map.values[i];
    if (!Number.isFinite(v)) continue;
    const t = v * scale;
    out[4 * i] = Math.round(255 * Math.min(1, 1.5 * t));
    out[4 * i + 1] = Math.round(255 * Math.max(0, Math.min(1, 1.5 * (1 - Math.abs(t - 0.5) * 2))));
    out[4 * i + 2] = Math.round(255 * Math.max(0, 1 - 1.5 * t));
    out[4 * i + 3] = alpha;
  }
  return out;
}

/** RGBA overlay of brush strokes from a per-pixel label grid. */
export function labelGridRgba(grid: Int32Array, width: number, height: number,
                              alpha = 130): Uint8ClampedArray {
  const out = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < grid.length; i++) {
    const label = grid[i];
    if (label <= 0) continue;
    const [r, g, b] = LABEL_COLORS[label % LABEL_COLORS.length];
    out[4 * i] = r;
    out[4 * i + 1] = g;
    out[4 * i + 2] = b;
    out[4 * i + 3] = alpha;
  }
  return out;
}
