/** Top-down map: scenario grid, landmarks, UAV trace, planned trajectory,
 * and the user pedestrian.
 */
import type { AppState } from "./state.js";
import {
  decodeCells,
  gpsToLocal,
  type GridDoc,
  type ScenarioDoc,
} from "./scenario.js";

export interface MapViewport {
  originX: number; // world meters at canvas left
  originY: number; // world meters at canvas bottom
  metersWide: number;
  metersTall: number;
}

export function viewportFor(grid: GridDoc): MapViewport {
  return {
    originX: grid.origin[0],
    originY: grid.origin[1],
    metersWide: grid.width * grid.resolution,
    metersTall: grid.height * grid.resolution,
  };
}

/** World meters -> canvas pixels (y axis flipped: north is up). */
export function worldToCanvas(
  x: number,
  y: number,
  vp: MapViewport,
  canvasWidth: number,
  canvasHeight: number,
): [number, number] {
  return [
    ((x - vp.originX) / vp.metersWide) * canvasWidth,
    canvasHeight - ((y - vp.originY) / vp.metersTall) * canvasHeight,
  ];
}

export function drawMap(
  ctx: CanvasRenderingContext2D,
  scenario: ScenarioDoc,
  state: AppState,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#0b0e14";
  ctx.fillRect(0, 0, width, height);
  const grid =
    scenario.grids.find((g) => g.kind === "uav_exploration") ??
    scenario.grids[0];
  if (!grid) return;
  const vp = viewportFor(grid);
  const toPx = (x: number, y: number) =>
    worldToCanvas(x, y, vp, width, height);

  // occupancy
  const cells = decodeCells(grid.cells, grid.width, grid.height);
  const cw = width / grid.width;
  const ch = height / grid.height;
  ctx.fillStyle = "#2d3440";
  for (let r = 0; r < grid.height; r++) {
    for (let c = 0; c < grid.width; c++) {
      if (cells[r * grid.width + c]) {
        ctx.fillRect(c * cw, height - (r + 1) * ch, cw + 0.5, ch + 0.5);
      }
    }
  }

  // landmarks
  ctx.fillStyle = "#5ccfe6";
  ctx.font = "11px sans-serif";
  for (const lm of scenario.landmarks) {
    const [x, y] = gpsToLocal(scenario.reference_gps, lm.gps);
    const [px, py] = toPx(x, y);
    ctx.beginPath();
    ctx.arc(px, py, 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(lm.name, px + 5, py - 5);
  }

  // user pedestrian
  const user = scenario.pedestrians.find((p) => p.is_user);
  if (user) {
    const [px, py] = toPx(user.position[0], user.position[1]);
    ctx.fillStyle = "#ffb454";
    ctx.beginPath();
    ctx.arc(px, py, 4, 0, 2 * Math.PI);
    ctx.fill();
  }

  // planned trajectory
  if (state.trajectory.length > 1) {
    ctx.strokeStyle = "#73d0ff";
    ctx.lineWidth = 1;
    ctx.setLineDash([4, 3]);
    ctx.beginPath();
    state.trajectory.forEach((p, i) => {
      const [px, py] = toPx(p[0], p[1]);
      i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.setLineDash([]);
  }

  // flown trace
  if (state.trace.length > 1) {
    ctx.strokeStyle = "#bae67e";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    state.trace.forEach(([x, y], i) => {
      const [px, py] = toPx(x, y);
      i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
    });
    ctx.stroke();
  }

  // UAV
  if (state.pose) {
    const [px, py] = toPx(state.pose.position[0], state.pose.position[1]);
    ctx.fillStyle = "#f28779";
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, 2 * Math.PI);
    ctx.fill();
    const yaw = state.pose.yaw;
    ctx.strokeStyle = "#f28779";
    ctx.beginPath();
    ctx.moveTo(px, py);
    ctx.lineTo(px + 10 * Math.cos(yaw), py - 10 * Math.sin(yaw));
    ctx.stroke();
  }
}
