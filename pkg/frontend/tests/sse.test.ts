import { describe, expect, it } from "vitest";

import { SseParser } from "../src/sse.js";

describe("SseParser", () => {
  it("parses complete data frames", () => {
    const parser = new SseParser();
    const events = parser.feed(
      'data: {"type":"metric","step":0,"value":4.5}\n\n' +
      'data: {"type":"run_end","status":"completed"}\n\n');
    expect(events.map((e) => e.type)).toEqual(["metric", "run_end"]);
    expect(events[0].value).toBe(4.5);
  });

  it("handles arbitrary chunk splits", () => {
    const parser = new SseParser();
    const wire = 'data: {"type":"metric","step":1,"value":1.0}\n\n';
    const events = [
      ...parser.feed(wire.slice(0, 13)),
      ...parser.feed(wire.slice(13, 30)),
      ...parser.feed(wire.slice(30)),
    ];
    expect(events).toHaveLength(1);
    expect(events[0].step).toBe(1);
  });

  it("drops heartbeat comments", () => {
    const parser = new SseParser();
    expect(parser.feed(": heartbeat\n\n")).toEqual([]);
    expect(parser.feed(': hb\n\ndata: {"type":"log_line"}\n\n'))
      .toHaveLength(1);
  });

  it("keeps incomplete frames buffered", () => {
    const parser = new SseParser();
    expect(parser.feed('data: {"type":"metric"')).toEqual([]);
    expect(parser.feed(',"step":2,"value":3}\n\n')[0].step).toBe(2);
  });
});
