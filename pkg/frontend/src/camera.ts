/** Camera panel: frame_meta boxes with depth shading, and the canvas-to-
 * camera-pixel mapping for click-to-track.
 */
import type { CameraIntrinsics, FrameMeta, FrameObject } from "./protocol.js";

/** Map a point on the (scaled) canvas back to camera pixel coordinates.
 *
 * Clicks must be sent in the camera's own pixel space exactly as defined
 * by frame_meta's camera model, regardless of how the canvas is scaled.
 */
export function canvasToCameraPixel(
  xCanvas: number,
  yCanvas: number,
  canvasWidth: number,
  canvasHeight: number,
  camera: CameraIntrinsics,
): { u: number; v: number } {
  return {
    u: (xCanvas / canvasWidth) * camera.width,
    v: (yCanvas / canvasHeight) * camera.height,
  };
}

/** Grey level for an object at `depth` meters: nearer is brighter. */
export function depthShade(depth: number, maxDepth = 40): number {
  if (!Number.isFinite(depth)) return 0;
  const t = Math.min(Math.max(depth / maxDepth, 0), 1);
  return Math.round(255 * (1 - 0.8 * t));
}

export function objectLabel(o: FrameObject): string {
  const tags = o.landmark_tags.length ? ` [${o.landmark_tags.join(",")}]` : "";
  return `${o.class_tag}${tags} ${o.depth.toFixed(1)}m`;
}

export function drawCameraPanel(
  ctx: CanvasRenderingContext2D,
  frame: FrameMeta | null,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  if (!frame) return;
  const sx = width / frame.camera.width;
  const sy = height / frame.camera.height;
  for (const o of frame.objects) {
    const [u0, v0, u1, v1] = o.bbox;
    const shade = depthShade(o.depth);
    ctx.fillStyle = `rgba(${shade},${shade},${shade},0.35)`;
    ctx.fillRect(u0 * sx, v0 * sy, (u1 - u0) * sx, (v1 - v0) * sy);
    ctx.strokeStyle = o.class_tag === "person" ? "#ffb454" : "#5ccfe6";
    ctx.lineWidth = 1.5;
    ctx.strokeRect(u0 * sx, v0 * sy, (u1 - u0) * sx, (v1 - v0) * sy);
    ctx.fillStyle = "#e6e1cf";
    ctx.font = "11px sans-serif";
    ctx.fillText(objectLabel(o), u0 * sx + 2, Math.max(10, v0 * sy - 3));
  }
}
