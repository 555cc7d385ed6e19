import { describe, expect, it, vi } from "vitest";

import { SessionConnection } from "../src/connection.js";

const HELLO_REPLY = JSON.stringify({
  kind: "hello",
  version: 1,
  session_config: {
    mode: "-+", sensitivity: "medium", scale_factors: { medium: 1 },
    view_zoom: 1, rates: { haptic_hz: 1000, analysis_hz: 100, broadcast_hz: 60 },
    force_decimation: 16, home: [3, 10],
  },
  model: { schema: 1, kind: "five_bar", lengths: { L0: 6, L1: 8, L2: 5, L3: 8, L4: 5 },
           base_a: [0, 0], base_b: [6, 0], limits: {} },
  model_hash: "f00d",
});

class FakeSocket {
  static instances: FakeSocket[] = [];
  sent: string[] = [];
  readyState = 0;
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  constructor(public url: string) {
    FakeSocket.instances.push(this);
  }

  open(): void {
    this.readyState = 1;
    this.onopen?.();
  }

  receive(text: string): void {
    this.onmessage?.({ data: text });
  }

  send(text: string): void {
    this.sent.push(text);
  }

  close(): void {
    this.readyState = 3;
    this.onclose?.();
  }
}

function makeConnection(events = {}) {
  FakeSocket.instances = [];
  const conn = new SessionConnection(
    "ws://test/ws",
    events,
    (url) => new FakeSocket(url) as unknown as WebSocket,
  );
  return conn;
}

describe("SessionConnection", () => {
  it("sends hello on open and surfaces the server hello", () => {
    const onHello = vi.fn();
    const conn = makeConnection({ onHello });
    conn.connect();
    const sock = FakeSocket.instances[0];
    sock.open();
    expect(JSON.parse(sock.sent[0])).toEqual({ kind: "hello", version: 1 });
    sock.receive(HELLO_REPLY);
    expect(onHello).toHaveBeenCalledOnce();
    expect(conn.hello?.model_hash).toBe("f00d");
  });

  it("refuses to send before the handshake completes", () => {
    const conn = makeConnection();
    conn.connect();
    const sock = FakeSocket.instances[0];
    sock.open();
    expect(conn.send("{}")).toBe(false);
    sock.receive(HELLO_REPLY);
    expect(conn.send("{}")).toBe(true);
  });

  it("reports error frames (version rejection) through onError", () => {
    const onError = vi.fn();
    const conn = makeConnection({ onError });
    conn.connect();
    const sock = FakeSocket.instances[0];
    sock.open();
    sock.receive(JSON.stringify({ kind: "error", code: "bad_version", reason: "nope" }));
    expect(onError).toHaveBeenCalledWith("bad_version", "nope");
  });

  it("reconnects with backoff after an unexpected close", () => {
    vi.useFakeTimers();
    try {
      const conn = makeConnection();
      conn.connect();
      expect(FakeSocket.instances.length).toBe(1);
      FakeSocket.instances[0].open();
      FakeSocket.instances[0].close(); // server went away
      vi.advanceTimersByTime(600); // first retry at 500 ms
      expect(FakeSocket.instances.length).toBe(2);
      FakeSocket.instances[1].close();
      vi.advanceTimersByTime(600); // second retry waits 1000 ms: not yet
      expect(FakeSocket.instances.length).toBe(2);
      vi.advanceTimersByTime(600);
      expect(FakeSocket.instances.length).toBe(3);
      // a successful handshake resumes the stream
      FakeSocket.instances[2].open();
      FakeSocket.instances[2].receive(HELLO_REPLY);
      expect(conn.hello).not.toBeNull();
      conn.close();
    } finally {
      vi.useRealTimers();
    }
  });

  it("does not reconnect after a user-initiated close", () => {
    vi.useFakeTimers();
    try {
      const conn = makeConnection();
      conn.connect();
      FakeSocket.instances[0].open();
      conn.close();
      vi.advanceTimersByTime(60_000);
      expect(FakeSocket.instances.length).toBe(1);
    } finally {
      vi.useRealTimers();
    }
  });
});
