/** Client-side rasterization of brush strokes into a binary mask. */

import type { BrushStroke, Point } from "./types.js";

/** Clamp a canvas point into frame bounds. */
export function clampPoint(p: Point, width: number, height: number): Point {
  return {
    x: Math.min(Math.max(p.x, 0), width - 1),
    y: Math.min(Math.max(p.y, 0), height - 1),
  };
}

function distanceToSegmentSq(px: number, py: number, a: Point, b: Point): number {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const lenSq = dx * dx + dy * dy;
  let t = 0;
  if (lenSq > 0) {
    t = ((px - a.x) * dx + (py - a.y) * dy) / lenSq;
    t = Math.min(1, Math.max(0, t));
  }
  const cx = a.x + t * dx;
  const cy = a.y + t * dy;
  return (px - cx) * (px - cx) + (py - cy) * (py - cy);
}

function stampStroke(mask: Uint8Array, width: number, height: number, stroke: BrushStroke): void {
  const value = stroke.polarity === "foreground" ? 1 : 0;
  const r = Math.max(1, stroke.radius);
  const rSq = r * r;
  const pts = stroke.points.length === 1
    ? [stroke.points[0], stroke.points[0]]
    : stroke.points;
  for (let i = 0; i + 1 < pts.length; i++) {
    const a = pts[i];
    const b = pts[i + 1];
    const x0 = Math.max(0, Math.floor(Math.min(a.x, b.x) - r));
    const x1 = Math.min(width - 1, Math.ceil(Math.max(a.x, b.x) + r));
    const y0 = Math.max(0, Math.floor(Math.min(a.y, b.y) - r));
    const y1 = Math.min(height - 1, Math.ceil(Math.max(a.y, b.y) + r));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        if (distanceToSegmentSq(x, y, a, b) <= rSq) {
          mask[y * width + x] = value;
        }
      }
    }
  }
}

/** Rasterize strokes in order; later strokes overwrite earlier ones. */
export function rasterizeStrokes(
  strokes: BrushStroke[],
  width: number,
  height: number,
): Uint8Array {
  const mask = new Uint8Array(width * height);
  for (const stroke of strokes) {
    stampStroke(mask, width, height, stroke);
  }
  return mask;
}

/** Fill a closed polygon (lasso tool); even-odd rule, later-wins like strokes. */
export function rasterizePolygon(
  mask: Uint8Array,
  width: number,
  height: number,
  points: Point[],
  polarity: "foreground" | "background",
): void {
  if (points.length < 3) return;
  const value = polarity === "foreground" ? 1 : 0;
  const ys = points.map((p) => p.y);
  const y0 = Math.max(0, Math.floor(Math.min(...ys)));
  const y1 = Math.min(height - 1, Math.ceil(Math.max(...ys)));
  for (let y = y0; y <= y1; y++) {
    const xs: number[] = [];
    for (let i = 0; i < points.length; i++) {
      const a = points[i];
      const b = points[(i + 1) % points.length];
      if (a.y <= y !== b.y <= y) {
        xs.push(a.x + ((y - a.y) / (b.y - a.y)) * (b.x - a.x));
      }
    }
    xs.sort((p, q) => p - q);
    for (let k = 0; k + 1 < xs.length; k += 2) {
      const xa = Math.max(0, Math.ceil(xs[k]));
      const xb = Math.min(width - 1, Math.floor(xs[k + 1]));
      for (let x = xa; x <= xb; x++) {
        mask[y * width + x] = value;
      }
    }
  }
}

/** One painting action; strokes and lasso fills apply in order. */
export type PaintOp =
  | { kind: "stroke"; stroke: BrushStroke }
  | { kind: "polygon"; points: Point[]; polarity: "foreground" | "background" };

/** Rasterize a full painting history, later operations winning. */
export function rasterizeOps(ops: PaintOp[], width: number, height: number): Uint8Array {
  const mask = new Uint8Array(width * height);
  for (const op of ops) {
    if (op.kind === "stroke") {
      stampStroke(mask, width, height, op.stroke);
    } else {
      rasterizePolygon(mask, width, height, op.points, op.polarity);
    }
  }
  return mask;
}

/** Render a binary mask into an RGBA buffer (white foreground, transparent
 *  background) for canvas preview. */
export function maskToRgba(mask: Uint8Array, rgba: Uint8ClampedArray): void {
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] ? 255 : 0;
    rgba[4 * i] = v;
    rgba[4 * i + 1] = v;
    rgba[4 * i + 2] = v;
    rgba[4 * i + 3] = mask[i] ? 255 : 0;
  }
}

/** Encode a binary mask as an 8-bit grayscale PNG via an offscreen canvas
 *  (browser path; tests encode PNGs themselves). */
export async function maskToPngBlob(
  mask: Uint8Array,
  width: number,
  height: number,
): Promise<Blob> {
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context for mask encoding");
  const image = ctx.createImageData(width, height);
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] ? 255 : 0;
    image.data[4 * i] = v;
    image.data[4 * i + 1] = v;
    image.data[4 * i + 2] = v;
    image.data[4 * i + 3] = 255;
  }
  ctx.putImageData(image, 0, 0);
  return new Promise((resolve, reject) => {
    canvas.toBlob((blob) => (blob ? resolve(blob) : reject(new Error("PNG encode failed"))),
      "image/png");
  });
}
