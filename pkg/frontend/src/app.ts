import { ApiClient, ApiError } from "./api.js";
import { RunLoop } from "./loop.js";
import { contoursToPaths, distanceHeatRgba, labelGridRgba, LABEL_COLORS } from "./overlay.js";
import { StrokeSet } from "./rasterize.js";
import type { RunMode, RunParams } from "./types.js";

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const client = new ApiClient("");
let session: { id: string; width: number; height: number } | null = null;
let strokes: StrokeSet | null = null;
let imageBitmap: ImageBitmap | null = null;
let labelBitmap: ImageBitmap | null = null;
let contourPaths = contoursToPaths([]);
let heat: Uint8ClampedArray | null = null;
let heatSize: [number, number] = [0, 0];
let drawing: Array<[number, number]> | null = null;

function canvas(): HTMLCanvasElement {
  return $("view") as unknown as HTMLCanvasElement;
}

function status(text: string): void {
  $("status").textContent = text;
}

function currentLabel(): number {
  const mode = ($("mode") as HTMLSelectElement).value as RunMode;
  if (mode === "tube") return 1;
  return Number((document.querySelector('input[name="label"]:checked') as HTMLInputElement).value);
}

function params(): RunParams {
  return {
    alpha_f: Number(($("alpha-f") as HTMLInputElement).value),
    alpha_b: Number(($("alpha-b") as HTMLInputElement).value),
    beta_s: Number(($("beta-s") as HTMLInputElement).value),
    beta_d: Number(($("beta-d") as HTMLInputElement).value),
  };
}

function redraw(): void {
  if (!session) return;
  const cv = canvas();
  const ctx = cv.getContext("2d")!;
  ctx.clearRect(0, 0, cv.width, cv.height);
  if (imageBitmap) ctx.drawImage(imageBitmap, 0, 0);
  const overlayAlpha = Number(($("overlay-alpha") as HTMLInputElement).value);
  if (labelBitmap) {
    ctx.globalAlpha = overlayAlpha;
    ctx.drawImage(labelBitmap, 0, 0);
    ctx.globalAlpha = 1.0;
  }
  if (heat && ($("show-heat") as HTMLInputElement).checked) {
    const img = new ImageData(new Uint8ClampedArray(heat), heatSize[0], heatSize[1]);
    const off = document.createElement("canvas");
    off.width = heatSize[0];
    off.height = heatSize[1];
    off.getContext("2d")!.putImageData(img, 0, 0);
    ctx.drawImage(off, 0, 0);
  }
  if (strokes) {
    const seedRgba = labelGridRgba(strokes.labelGrid(), session.width, session.height);
    const img = new ImageData(new Uint8ClampedArray(seedRgba), session.width, session.height);
    const off = document.createElement("canvas");
    off.width = session.width;
    off.height = session.height;
    off.getContext("2d")!.putImageData(img, 0, 0);
    ctx.drawImage(off, 0, 0);
  }
  // contour polylines exactly as the service returned them
  ctx.lineWidth = 1.5;
  for (const path of contourPaths) {
    const [r, g, b] = LABEL_COLORS[path.label % LABEL_COLORS.length];
    ctx.strokeStyle = `rgb(${r},${g},${b})`;
    ctx.beginPath();
    path.points.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
    if (path.closed) ctx.closePath();
    ctx.stroke();
  }
}

async function loadImage(file: File): Promise<void> {
  const bytes = new Uint8Array(await file.arrayBuffer());
  try {
    session = await client.createSession(bytes, file.name);
  } catch (e) {
    status(`upload failed: ${(e as Error).message}`);
    return;
  }
  strokes = new StrokeSet(session.width, session.height);
  labelBitmap = null;
  contourPaths = [];
  heat = null;
  const cv = canvas();
  cv.width = session.width;
  cv.height = session.height;
  imageBitmap = await createImageBitmap(file);
  status(`session ${session.id.slice(0, 8)} - ${session.width}x${session.height}; paint seeds`);
  redraw();
}

function canvasPoint(ev: PointerEvent): [number, number] {
  const rect = canvas().getBoundingClientRect();
  // zoom is a pure view transform; canvas coordinates map 1:1 to pixels
  const sx = canvas().width / rect.width;
  const sy = canvas().height / rect.height;
  return [(ev.clientX - rect.left) * sx, (ev.clientY - rect.top) * sy];
}

async function runSegmentation(): Promise<void> {
  if (!session || !strokes || strokes.count === 0) {
    status("paint at least one stroke first");
    return;
  }
  const mode = ($("mode") as HTMLSelectElement).value as RunMode;
  const runBtn = $("run") as HTMLButtonElement;
  runBtn.disabled = true;
  try {
    await client.putSeeds(session.id, strokes.toSeedsJson());
    const loop = new RunLoop(client, 150, {
      onProgress: (p) => status(`running: ${p.accepted_count}/${p.total}`),
    });
    const nTh = mode === "tube"
      ? Number(($("n-th") as HTMLInputElement).value) : undefined;
    const final = await loop.run(session.id, mode, params(), nTh);
    if (final.status === "failed") {
      status(`run failed: ${final.error ?? "unknown error"}`);
      return;
    }
    const [labelBlob, contours, dist] = await Promise.all([
      client.labelPngBlob(session.id),
      client.contours(session.id),
      client.distanceMap(session.id),
    ]);
    labelBitmap = await createImageBitmap(labelBlob);
    contourPaths = contoursToPaths(contours.parsed.contours);
    heat = distanceHeatRgba(dist);
    heatSize = [dist.width, dist.height];
    status(`done: ${final.accepted_count} pixels accepted; refine seeds and rerun`);
    redraw();
  } catch (e) {
    if (e instanceof ApiError) {
      status(`service error ${e.status}: ${e.message}`);
    } else {
      status(`error: ${(e as Error).message}`);
    }
  } finally {
    runBtn.disabled = false;
  }
}

export function wireUi(): void {
  ($("file") as HTMLInputElement).addEventListener("change", (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (file) void loadImage(file);
  });
  const cv = canvas();
  cv.addEventListener("pointerdown", (ev) => {
    if (!strokes) return;
    drawing = [canvasPoint(ev)];
    cv.setPointerCapture(ev.pointerId);
  });
  cv.addEventListener("pointermove", (ev) => {
    if (!drawing) return;
    drawing.push(canvasPoint(ev));
    const radius = Number(($("brush") as HTMLInputElement).value);
    // live preview: temporary stroke, replaced on pointerup
    if (strokes) {
      strokes.add({ label: currentLabel(), radius, points: drawing.slice(-2) });
      redraw();
      strokes.undo();
    }
  });
  cv.addEventListener("pointerup", () => {
    if (!strokes || !drawing) return;
    strokes.add({
      label: currentLabel(),
      radius: Number(($("brush") as HTMLInputElement).value),
      points: drawing,
    });
    drawing = null;
    redraw();
  });
  $("undo").addEventListener("click", () => {
    strokes?.undo();
    redraw();
  });
  $("clear").addEventListener("click", () => {
    strokes?.clear();
    redraw();
  });
  $("run").addEventListener("click", () => void runSegmentation());
  ($("overlay-alpha") as HTMLInputElement).addEventListener("input", redraw);
  ($("show-heat") as HTMLInputElement).addEventListener("change", redraw);
  ($("mode") as HTMLSelectElement).addEventListener("change", () => {
    const tube = ($("mode") as HTMLSelectElement).value === "tube";
    $("fb-labels").style.display = tube ? "none" : "";
    $("tube-opts").style.display = tube ? "" : "none";
  });
  status("load an image to start");
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  wireUi();
}
