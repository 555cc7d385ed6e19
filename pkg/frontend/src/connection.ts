// Websocket session client: hello handshake, auto-reconnect with backoff,
// typed callbacks. Rejections (version mismatch, malformed) surface through
// onError so the app can show a banner.

import {
  HelloFrame,
  SnapshotFrame,
  clientHello,
  parseServerFrame,
} from "./protocol.js";

export interface ConnectionEvents {
  onHello?: (hello: HelloFrame) => void;
  onSnapshot?: (snap: SnapshotFrame) => void;
  onError?: (code: string, reason: string) => void;
  onStatus?: (status: "connecting" | "open" | "closed") => void;
}

const MAX_BACKOFF_MS = 10_000;
const WS_OPEN = 1; // WebSocket.OPEN without touching the global (absent in node)

export class SessionConnection {
  private ws: WebSocket | null = null;
  private attempts = 0;
  private closedByUser = false;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  hello: HelloFrame | null = null;

  constructor(
    private url: string,
    private events: ConnectionEvents,
    private socketFactory: (url: string) => WebSocket = (u) => new WebSocket(u),
  ) {}

  connect(): void {
    this.closedByUser = false;
    this.events.onStatus?.("connecting");
    this.ws = this.socketFactory(this.url);
    this.ws.onopen = () => {
      this.attempts = 0;
      this.ws?.send(clientHello());
    };
    this.ws.onmessage = (ev: MessageEvent) => this.handleFrame(String(ev.data));
    this.ws.onclose = () => {
      this.hello = null;
      this.events.onStatus?.("closed");
      if (!this.closedByUser) this.scheduleReconnect();
    };
    this.ws.onerror = () => {
      // onclose follows and drives the retry
    };
  }

  private handleFrame(text: string): void {
    let frame;
    try {
      frame = parseServerFrame(text);
    } catch (err) {
      this.events.onError?.("parse", String(err));
      return;
    }
    if (frame.kind === "hello") {
      this.hello = frame;
      this.events.onStatus?.("open");
      this.events.onHello?.(frame);
    } else if (frame.kind === "snapshot") {
      this.events.onSnapshot?.(frame);
    } else {
      this.events.onError?.(frame.code, frame.reason);
    }
  }

  private scheduleReconnect(): void {
    const delay = Math.min(MAX_BACKOFF_MS, 500 * 2 ** this.attempts);
    this.attempts += 1;
    this.retryTimer = setTimeout(() => this.connect(), delay);
  }

  send(text: string): boolean {
    if (this.ws && this.ws.readyState === WS_OPEN && this.hello) {
      this.ws.send(text);
      return true;
    }
    return false;
  }

  close(): void {
    this.closedByUser = true;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.ws?.close();
  }
}
