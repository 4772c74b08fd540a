import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { parseServerMessage, type ServerMessage } from "../src/protocol.js";
import { initialState, reduceAll, screenSummary } from "../src/state.js";

const here = dirname(fileURLToPath(import.meta.url));

function loadRecord(name: string): ServerMessage[] {
  const lines = readFileSync(join(here, "fixtures", name), "utf-8")
    .trim()
    .split("\n");
  const messages: ServerMessage[] = [];
  for (const line of lines) {
    const rec = JSON.parse(line) as { dir: string; msg: unknown };
    if (rec.dir !== "s2c") continue; // client->station lines never render
    const msg = parseServerMessage(JSON.stringify(rec.msg));
    if (msg) messages.push(msg);
  }
  return messages;
}

describe("replay fidelity", () => {
  const messages = loadRecord("session.ndjson");

  it("replaying the committed record reproduces the committed screen state", () => {
    const final = screenSummary(reduceAll(initialState(), messages));
    const expected = JSON.parse(
      readFileSync(join(here, "fixtures", "session.summary.json"), "utf-8"),
    );
    expect(final).toEqual(expected);
  });

  it("the record drives a full mission to a rendered conclusion", () => {
    const final = screenSummary(reduceAll(initialState(), messages));
    expect(final.missionState).toBe("standby_hover");
    expect(final.planId).not.toBeNull();
    expect(
      final.stepStatuses.every((s: string) => s.endsWith(":succeeded")),
    ).toBe(true);
    expect(final.traceLength).toBeGreaterThan(100);
    expect(final.lastAnswer).toBeTruthy();
    expect(final.replay).toBe(false); // live record: no replay marker
  });

  it("is deterministic across repeated folds", () => {
    const a = screenSummary(reduceAll(initialState(), messages));
    const b = screenSummary(reduceAll(initialState(), messages));
    expect(a).toEqual(b);
  });
});
