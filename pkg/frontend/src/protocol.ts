/** Wire protocol: one JSON object per WebSocket text frame. */

export interface Pose {
  position: number[];
  velocity: number[];
  yaw: number;
}

export interface Telemetry {
  type: "telemetry";
  tick: number;
  pose: Pose;
  mode: string;
  mission_state: string | null;
}

export interface PlanStep {
  tool: string;
  params: Record<string, unknown>;
}

export interface PlanMessage {
  type: "plan";
  plan: { plan_id: string; attempt: number; steps: PlanStep[] };
}

export interface StepUpdate {
  type: "step_update";
  index: number;
  status: string;
  cause: string | null;
}

export interface FrameObject {
  id: string;
  class_tag: string;
  landmark_tags: string[];
  bbox: [number, number, number, number];
  depth: number;
}

export interface CameraIntrinsics {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
}

export interface FrameMeta {
  type: "frame_meta";
  tick: number;
  objects: FrameObject[];
  camera: CameraIntrinsics;
  pose_at_capture: Pose;
}

export interface Answer {
  type: "answer";
  text: string;
}

export interface TrajectoryMessage {
  type: "trajectory";
  points: number[][];
}

export interface EventMessage {
  type: "event";
  level: string;
  text: string;
  replay: boolean;
}

export type ServerMessage =
  | Telemetry
  | PlanMessage
  | StepUpdate
  | FrameMeta
  | Answer
  | TrajectoryMessage
  | EventMessage;

export type ClientMessage =
  | { type: "command"; text: string }
  | { type: "click"; u: number; v: number }
  | { type: "gesture"; dir: string }
  | { type: "abort" }
  | { type: "ack" };

export const GESTURE_DIRS = [
  "up",
  "down",
  "left",
  "right",
  "forward",
  "backward",
] as const;

export function parseServerMessage(line: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const type = (doc as { type?: unknown }).type;
  const known = [
    "telemetry",
    "plan",
    "step_update",
    "frame_meta",
    "answer",
    "trajectory",
    "event",
  ];
  if (typeof type !== "string" || !known.includes(type)) return null;
  return doc as ServerMessage;
}
