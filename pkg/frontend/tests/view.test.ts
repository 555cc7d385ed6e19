import { describe, expect, it } from "vitest";

import { ViewState } from "../src/view.js";

describe("ViewState transforms", () => {
  it("round-trips world -> screen -> world", () => {
    const view = new ViewState(800, 600, 3, 5, 0.02);
    for (const [wx, wy] of [[0, 0], [3, 5], [-7.5, 12.25]] as const) {
      const [sx, sy] = view.worldToScreen(wx, wy);
      const [bx, by] = view.screenToWorld(sx, sy);
      expect(bx).toBeCloseTo(wx, 10);
      expect(by).toBeCloseTo(wy, 10);
    }
  });

  it("screen y grows downward", () => {
    const view = new ViewState(800, 600, 0, 0, 0.1);
    const [, low] = view.worldToScreen(0, -1);
    const [, high] = view.worldToScreen(0, 1);
    expect(low).toBeGreaterThan(high);
  });

  it("zoomAt keeps the anchor point fixed", () => {
    const view = new ViewState(800, 600, 3, 5, 0.05);
    const anchor: [number, number] = [200, 130];
    const before = view.screenToWorld(...anchor);
    view.zoomAt(anchor[0], anchor[1], 0.5);
    const after = view.screenToWorld(...anchor);
    expect(after[0]).toBeCloseTo(before[0], 9);
    expect(after[1]).toBeCloseTo(before[1], 9);
    expect(view.zoom).toBeCloseTo(0.025, 12);
  });

  it("pan moves the view by pixel deltas", () => {
    const view = new ViewState(800, 600, 0, 0, 0.1);
    view.panByPixels(10, -20);
    expect(view.centerX).toBeCloseTo(-1.0, 12);
    expect(view.centerY).toBeCloseTo(-2.0, 12);
  });

  it("fit frames the rectangle", () => {
    const view = new ViewState(1000, 500);
    view.fit(-13, 19, -13.6, 13.6, 1.0);
    expect(view.centerX).toBeCloseTo(3);
    expect(view.centerY).toBeCloseTo(0);
    // limited by the shorter axis: 27.2 world units over 500 px
    expect(view.zoom).toBeCloseTo(27.2 / 500, 12);
  });

  it("rejects a non-positive zoom", () => {
    expect(() => new ViewState(10, 10, 0, 0, 0)).toThrow();
    const view = new ViewState(10, 10);
    expect(() => view.zoomAt(0, 0, -1)).toThrow();
  });
});
