import { describe, expect, it } from "vitest";

import { parseServerMessage } from "../src/protocol.js";
import {
  initialState,
  MAX_EVENTS,
  MAX_TRACE,
  reduce,
  reduceAll,
  screenSummary,
  type AppState,
} from "../src/state.js";

function telemetry(tick: number, x = 0, y = 0): any {
  return {
    type: "telemetry",
    tick,
    pose: { position: [x, y, 5], velocity: [0, 0, 0], yaw: 0 },
    mode: "standby_hover",
    mission_state: "standby_hover",
  };
}

const PLAN = {
  type: "plan",
  plan: {
    plan_id: "plan-x-a0",
    attempt: 0,
    steps: [
      { tool: "geo_navigate", params: { landmark: "library" } },
      { tool: "return_to_user", params: {} },
    ],
  },
} as any;

describe("reducer", () => {
  it("is pure: inputs are never mutated", () => {
    const s0 = initialState();
    const frozen = JSON.stringify(s0);
    reduce(reduce(s0, telemetry(1, 2, 3)), PLAN);
    expect(JSON.stringify(s0)).toBe(frozen);
  });

  it("accumulates the telemetry trace and latest pose", () => {
    let s = initialState();
    s = reduce(s, telemetry(1, 0, 0));
    s = reduce(s, telemetry(2, 1, 2));
    expect(s.tick).toBe(2);
    expect(s.trace).toEqual([
      [0, 0],
      [1, 2],
    ]);
    expect(s.pose!.position).toEqual([1, 2, 5]);
    expect(s.missionState).toBe("standby_hover");
  });

  it("caps the trace length", () => {
    let s = initialState();
    for (let i = 0; i < MAX_TRACE + 10; i++) s = reduce(s, telemetry(i, i, 0));
    expect(s.trace.length).toBe(MAX_TRACE);
    expect(s.trace[s.trace.length - 1]![0]).toBe(MAX_TRACE + 9);
  });

  it("installs plans with all steps pending, then applies step updates", () => {
    let s = reduce(initialState(), PLAN);
    expect(s.plan!.planId).toBe("plan-x-a0");
    expect(s.plan!.steps.map((x) => x.status)).toEqual(["pending", "pending"]);
    s = reduce(s, {
      type: "step_update",
      index: 0,
      status: "running",
      cause: null,
    } as any);
    s = reduce(s, {
      type: "step_update",
      index: 0,
      status: "failed",
      cause: "no_path",
    } as any);
    expect(s.plan!.steps[0]).toMatchObject({
      status: "failed",
      cause: "no_path",
    });
    expect(s.plan!.steps[1]!.status).toBe("pending");
  });

  it("ignores step updates without a plan or out of range", () => {
    const s0 = initialState();
    const s1 = reduce(s0, {
      type: "step_update",
      index: 3,
      status: "running",
      cause: null,
    } as any);
    expect(s1).toBe(s0);
  });

  it("collects answers as chat bubbles and tracks the last answer", () => {
    let s = initialState();
    s = reduce(s, { type: "answer", text: "first" } as any);
    s = reduce(s, { type: "answer", text: "second" } as any);
    expect(s.lastAnswer).toBe("second");
    expect(s.chat.map((c) => c.text)).toEqual(["first", "second"]);
  });

  it("keeps the latest trajectory and caps events", () => {
    let s = initialState();
    s = reduce(s, { type: "trajectory", points: [[0, 0, 5], [1, 0, 5]] } as any);
    expect(s.trajectory.length).toBe(2);
    for (let i = 0; i < MAX_EVENTS + 5; i++) {
      s = reduce(s, {
        type: "event",
        level: "info",
        text: `e${i}`,
        replay: false,
      } as any);
    }
    expect(s.events.length).toBe(MAX_EVENTS);
  });

  it("latches the replay flag from any replay event", () => {
    let s = initialState();
    s = reduce(s, {
      type: "event",
      level: "info",
      text: "arrived",
      replay: true,
    } as any);
    s = reduce(s, {
      type: "event",
      level: "info",
      text: "later",
      replay: false,
    } as any);
    expect(s.replay).toBe(true);
  });

  it("folds identically regardless of call batching", () => {
    const msgs = [telemetry(1), PLAN, telemetry(2, 1, 1)];
    const a = reduceAll(initialState(), msgs);
    let b: AppState = initialState();
    for (const m of msgs) b = reduce(b, m);
    expect(screenSummary(a)).toEqual(screenSummary(b));
  });
});

describe("parseServerMessage", () => {
  it("accepts known types and rejects junk", () => {
    expect(parseServerMessage(JSON.stringify(telemetry(1)))!.type).toBe(
      "telemetry",
    );
    expect(parseServerMessage("{broken")).toBeNull();
    expect(parseServerMessage('{"type":"warp"}')).toBeNull();
    expect(parseServerMessage('[1,2]')).toBeNull();
  });
});
