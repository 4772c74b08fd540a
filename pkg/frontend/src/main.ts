/** Entry point: wires the message stream to the pure state fold and the
 * canvas renderers; all user input goes out as wire messages.
 */
import { canvasToCameraPixel, drawCameraPanel } from "./camera.js";
import { drawMap } from "./map.js";
import { ConsoleLink, type LinkStatus } from "./net.js";
import { GESTURE_DIRS } from "./protocol.js";
import type { ScenarioDoc } from "./scenario.js";
import { initialState, reduce, type AppState } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function start(): Promise<void> {
  const base = window.location;
  const scenario: ScenarioDoc = await (await fetch("/scenario")).json();

  let state: AppState = initialState();
  let dirty = true;

  const mapCanvas = el<HTMLCanvasElement>("map");
  const camCanvas = el<HTMLCanvasElement>("camera");
  const statusEl = el<HTMLSpanElement>("status");
  const planEl = el<HTMLDivElement>("plan");
  const chatEl = el<HTMLDivElement>("chat");
  const commandInput = el<HTMLInputElement>("command");

  const wsUrl = `${base.protocol === "https:" ? "wss" : "ws"}://${base.host}/ws`;
  const link = new ConsoleLink(wsUrl, {
    onMessage: (msg) => {
      state = reduce(state, msg);
      dirty = true;
    },
    onStatus: (s: LinkStatus) => {
      statusEl.textContent = state.replay ? `${s} (replay)` : s;
      statusEl.className = `status ${s}`;
    },
  });
  link.connect();

  el<HTMLFormElement>("command-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const text = commandInput.value.trim();
    if (!text) return;
    link.send({ type: "command", text });
    state = { ...state, chat: state.chat.concat([{ role: "operator", text }]) };
    commandInput.value = "";
    dirty = true;
  });

  el<HTMLButtonElement>("abort").addEventListener("click", () =>
    link.send({ type: "abort" }),
  );
  el<HTMLButtonElement>("ack").addEventListener("click", () =>
    link.send({ type: "ack" }),
  );

  const pad = el<HTMLDivElement>("gestures");
  for (const dir of GESTURE_DIRS) {
    const btn = document.createElement("button");
    btn.textContent = dir;
    btn.addEventListener("click", () => link.send({ type: "gesture", dir }));
    pad.appendChild(btn);
  }

  camCanvas.addEventListener("click", (ev) => {
    if (!state.frame) return;
    const rect = camCanvas.getBoundingClientRect();
    const { u, v } = canvasToCameraPixel(
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      rect.width,
      rect.height,
      state.frame.camera,
    );
    link.send({ type: "click", u, v });
  });

  function renderPlan(): void {
    if (!state.plan) {
      planEl.textContent = "no active plan";
      return;
    }
    const rows = state.plan.steps
      .map(
        (s) =>
          `<li class="${s.status}">${s.tool} — ${s.status}` +
          (s.cause ? ` (${s.cause})` : "") +
          "</li>",
      )
      .join("");
    planEl.innerHTML =
      `<div>${state.plan.planId} (attempt ${state.plan.attempt})</div>` +
      `<ol>${rows}</ol>`;
  }

  function renderChat(): void {
    chatEl.innerHTML = state.chat
      .map((c) => `<div class="bubble ${c.role}">${c.text}</div>`)
      .join("");
    chatEl.scrollTop = chatEl.scrollHeight;
  }

  function frame(): void {
    if (dirty) {
      dirty = false;
      const mctx = mapCanvas.getContext("2d");
      if (mctx) drawMap(mctx, scenario, state);
      const cctx = camCanvas.getContext("2d");
      if (cctx) drawCameraPanel(cctx, state.frame);
      renderPlan();
      renderChat();
      el<HTMLSpanElement>("mode").textContent =
        `${state.missionState ?? "-"} · tick ${state.tick}`;
    }
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

start().catch((e) => {
  document.body.textContent = `failed to start console: ${e}`;
});
