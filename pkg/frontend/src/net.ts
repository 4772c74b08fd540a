/** WebSocket client: reconnect with backoff, stale-stream detection. */
import type { ClientMessage } from "./protocol.js";
import { parseServerMessage, type ServerMessage } from "./protocol.js";

export const BACKOFF_BASE_MS = 500;
export const BACKOFF_MAX_MS = 8000;
export const STALE_AFTER_MS = 1000;

/** Delay before reconnect attempt `attempt` (0-based): 500 ms doubling to 8 s. */
export function backoffMs(attempt: number): number {
  return Math.min(BACKOFF_BASE_MS * 2 ** attempt, BACKOFF_MAX_MS);
}

export type LinkStatus = "connecting" | "live" | "stale" | "disconnected";

export interface ConsoleLinkHandlers {
  onMessage: (msg: ServerMessage) => void;
  onStatus: (status: LinkStatus) => void;
}

export class ConsoleLink {
  private ws: WebSocket | null = null;
  private attempt = 0;
  private staleTimer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private url: string,
    private handlers: ConsoleLinkHandlers,
  ) {}

  connect(): void {
    this.handlers.onStatus("connecting");
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempt = 0;
      this.handlers.onStatus("live");
    };
    ws.onmessage = (ev) => {
      this.touch();
      const msg = parseServerMessage(String(ev.data));
      if (msg) this.handlers.onMessage(msg);
    };
    ws.onclose = () => this.scheduleReconnect();
    ws.onerror = () => ws.close();
  }

  send(msg: ClientMessage): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }

  close(): void {
    this.closed = true;
    if (this.staleTimer) clearTimeout(this.staleTimer);
    this.ws?.close();
  }

  private touch(): void {
    this.handlers.onStatus("live");
    if (this.staleTimer) clearTimeout(this.staleTimer);
    this.staleTimer = setTimeout(
      () => this.handlers.onStatus("stale"),
      STALE_AFTER_MS,
    );
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    this.handlers.onStatus("disconnected");
    const delay = backoffMs(this.attempt);
    this.attempt += 1;
    setTimeout(() => {
      if (!this.closed) this.connect();
    }, delay);
  }
}
