/** Console state as a pure fold over the server message stream.
 *
 * Everything the screen shows is derived from `AppState`; replaying the
 * same messages therefore reproduces the identical screen.
 */
import type {
  FrameMeta,
  PlanStep,
  Pose,
  ServerMessage,
} from "./protocol.js";

export interface StepView {
  tool: string;
  params: Record<string, unknown>;
  status: string;
  cause: string | null;
}

export interface PlanView {
  planId: string;
  attempt: number;
  steps: StepView[];
}

export interface ChatEntry {
  role: "operator" | "uav";
  text: string;
}

export interface AppState {
  tick: number;
  pose: Pose | null;
  mode: string;
  missionState: string | null;
  trace: [number, number][];
  trajectory: number[][];
  plan: PlanView | null;
  frame: FrameMeta | null;
  chat: ChatEntry[];
  events: { level: string; text: string }[];
  lastAnswer: string | null;
  replay: boolean;
}

export const MAX_TRACE = 5000;
export const MAX_EVENTS = 200;

export function initialState(): AppState {
  return {
    tick: 0,
    pose: null,
    mode: "grounded",
    missionState: null,
    trace: [],
    trajectory: [],
    plan: null,
    frame: null,
    chat: [],
    events: [],
    lastAnswer: null,
    replay: false,
  };
}

function planView(planId: string, attempt: number, steps: PlanStep[]): PlanView {
  return {
    planId,
    attempt,
    steps: steps.map((s) => ({
      tool: s.tool,
      params: s.params,
      status: "pending",
      cause: null,
    })),
  };
}

export function reduce(state: AppState, msg: ServerMessage): AppState {
  switch (msg.type) {
    case "telemetry": {
      const trace = state.trace.concat([
        [msg.pose.position[0], msg.pose.position[1]],
      ]);
      if (trace.length > MAX_TRACE) trace.shift();
      return {
        ...state,
        tick: msg.tick,
        pose: msg.pose,
        mode: msg.mode,
        missionState: msg.mission_state,
        trace,
      };
    }
    case "plan":
      return {
        ...state,
        plan: planView(msg.plan.plan_id, msg.plan.attempt, msg.plan.steps),
      };
    case "step_update": {
      if (!state.plan || msg.index >= state.plan.steps.length) return state;
      const steps = state.plan.steps.map((s, i) =>
        i === msg.index ? { ...s, status: msg.status, cause: msg.cause } : s,
      );
      return { ...state, plan: { ...state.plan, steps } };
    }
    case "frame_meta":
      return { ...state, frame: msg };
    case "answer":
      return {
        ...state,
        lastAnswer: msg.text,
        chat: state.chat.concat([{ role: "uav", text: msg.text }]),
      };
    case "trajectory":
      return { ...state, trajectory: msg.points };
    case "event": {
      const events = state.events.concat([
        { level: msg.level, text: msg.text },
      ]);
      if (events.length > MAX_EVENTS) events.shift();
      return { ...state, events, replay: state.replay || msg.replay };
    }
  }
}

export function reduceAll(
  state: AppState,
  messages: Iterable<ServerMessage>,
): AppState {
  let s = state;
  for (const m of messages) s = reduce(s, m);
  return s;
}

/** Compact description of what the screen shows, used by replay tests. */
export function screenSummary(state: AppState) {
  return {
    tick: state.tick,
    missionState: state.missionState,
    mode: state.mode,
    planId: state.plan ? state.plan.planId : null,
    stepStatuses: state.plan
      ? state.plan.steps.map((s) => `${s.tool}:${s.status}`)
      : [],
    traceLength: state.trace.length,
    lastTracePoint: state.trace.length
      ? state.trace[state.trace.length - 1]
      : null,
    trajectoryPoints: state.trajectory.length,
    lastAnswer: state.lastAnswer,
    chatLength: state.chat.length,
    eventTexts: state.events.map((e) => e.text),
    replay: state.replay,
  };
}
