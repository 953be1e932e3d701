/**
 * Tone-curve plotting helpers.
 *
 * The polyline is exactly the 256 response values mapped into canvas
 * coordinates; no smoothing, resampling, or filtering on the client.
 */

export type Point = [number, number];

export function curvePolyline(values: number[], width: number, height: number): Point[] {
  if (values.length !== 256) {
    throw new Error(`expected 256 curve values, got ${values.length}`);
  }
  return values.map((v, k) => {
    const x = (k / 255) * (width - 1);
    const y = (height - 1) * (1 - v / 255);
    return [x, y] as Point;
  });
}

export function drawCurve(
  ctx: CanvasRenderingContext2D,
  values: number[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#777";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(0, height - 1);
  ctx.lineTo(width - 1, 0);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.strokeStyle = "#0a7cff";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  const points = curvePolyline(values, width, height);
  points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.stroke();
}

/** Render a row-major 9-entry matrix as 3x3 fixed-point strings. */
export function formatMatrix(ccm: number[]): string[][] {
  if (ccm.length !== 9) {
    throw new Error(`expected 9 matrix entries, got ${ccm.length}`);
  }
  const rows: string[][] = [];
  for (let i = 0; i < 3; i++) {
    rows.push(ccm.slice(3 * i, 3 * i + 3).map((v) => v.toFixed(4)));
  }
  return rows;
}
