import type { SeedsJson } from "./types.js";

export interface Stroke {
  label: number;
  radius: number;
  points: Array<[number, number]>;
}

/** Pixels covered by the disk of the given radius around (cx, cy), clipped. */
export function diskPixels(
  cx: number,
  cy: number,
  radius: number,
  width: number,
  height: number,
): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  const r = Math.max(0, radius);
  const x0 = Math.max(0, Math.ceil(cx - r));
  const x1 = Math.min(width - 1, Math.floor(cx + r));
  const y0 = Math.max(0, Math.ceil(cy - r));
  const y1 = Math.min(height - 1, Math.floor(cy + r));
  const r2 = r * r;
  for (let y = y0; y <= y1; y++) {
    for (let x = x0; x <= x1; x++) {
      const dx = x - cx;
      const dy = y - cy;
      if (dx * dx + dy * dy <= r2) out.push([x, y]);
    }
  }
  return out;
}

/** Insert intermediate samples so consecutive points are at most 1 px apart. */
export function densify(points: Array<[number, number]>): Array<[number, number]> {
  if (points.length <= 1) return points.slice();
  const out: Array<[number, number]> = [points[0]];
  for (let i = 1; i < points.length; i++) {
    const [ax, ay] = points[i - 1];
    const [bx, by] = points[i];
    const steps = Math.max(1, Math.ceil(Math.hypot(bx - ax, by - ay)));
    for (let s = 1; s <= steps; s++) {
      out.push([ax + ((bx - ax) * s) / steps, ay + ((by - ay) * s) / steps]);
    }
  }
  return out;
}

/**
 * Mutable collection of brush strokes with undo, rasterized on demand as the
 * union of the stroke disks clipped to the image. A pixel painted by several
 * labels belongs to the most recently painted stroke, so the produced seed
 * sets are always disjoint; duplicates within a label are deduplicated.
 */
export class StrokeSet {
  readonly width: number;
  readonly height: number;
  private strokes: Stroke[] = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  add(stroke: Stroke): void {
    this.strokes.push({
      label: stroke.label,
      radius: stroke.radius,
      points: densify(stroke.points),
    });
  }

  undo(): Stroke | undefined {
    return this.strokes.pop();
  }

  clear(): void {
    this.strokes = [];
  }

  get count(): number {
    return this.strokes.length;
  }

  /** Per-pixel winning label (0 = unpainted), last stroke wins. */
  labelGrid(): Int32Array {
    const grid = new Int32Array(this.width * this.height);
    for (const stroke of this.strokes) {
      for (const [px, py] of stroke.points) {
        for (const [x, y] of diskPixels(px, py, stroke.radius, this.width, this.height)) {
          grid[y * this.width + x] = stroke.label;
        }
      }
    }
    return grid;
  }

  toSeedsJson(): SeedsJson {
    const grid = this.labelGrid();
    const byLabel = new Map<number, Array<[number, number]>>();
    for (let y = 0; y < this.height; y++) {
      for (let x = 0; x < this.width; x++) {
        const label = grid[y * this.width + x];
        if (label > 0) {
          let bucket = byLabel.get(label);
          if (!bucket) {
            bucket = [];
            byLabel.set(label, bucket);
          }
          bucket.push([x, y]);
        }
      }
    }
    const labels = [...byLabel.keys()].sort((a, b) => a - b);
    return { sets: labels.map((label) => ({ label, points: byLabel.get(label)! })) };
  }
}

/** Canonical "label:x,y" key set for set-equality comparisons. */
export function seedKeySet(seeds: SeedsJson): Set<string> {
  const out = new Set<string>();
  for (const s of seeds.sets) {
    for (const [x, y] of s.points) out.add(`${s.label}:${x},${y}`);
  }
  return out;
}

export function seedSetsEqual(a: SeedsJson, b: SeedsJson): boolean {
  const ka = seedKeySet(a);
  const kb = seedKeySet(b);
  if (ka.size !== kb.size) return false;
  for (const k of ka) if (!kb.has(k)) return false;
  return true;
}
