import type { RunEvent } from "./types.js";

/** Incremental server-sent-events frame parser. Feed it raw chunks in any
 * split; it yields the JSON payload of each complete `data:` frame and
 * silently drops comment (heartbeat) frames. */
export class SseParser {
  private buffer = "";

  feed(chunk: string): RunEvent[] {
    this.buffer += chunk;
    const events: RunEvent[] = [];
    let sep: number;
    while ((sep = this.buffer.indexOf("\n\n")) >= 0) {
      const frame = this.buffer.slice(0, sep);
      this.buffer = this.buffer.slice(sep + 2);
      for (const line of frame.split("\n")) {
        if (line.startsWith("data: ")) {
          events.push(JSON.parse(line.slice(6)) as RunEvent);
        }
        // lines starting with ":" are heartbeats; ignore
      }
    }
    return events;
  }
}

export interface StreamHandlers {
  onEvent: (event: RunEvent) => void;
  onEnd: () => void;
  /** called with the last seen step when the stream drops and we resubscribe,
   * so the view can gap-fill from the series endpoint */
  onGap?: (lastStep: number) => void;
}

/** Subscribe to a run's live stream with automatic resubscription. */
export async function streamRun(
  url: string,
  handlers: StreamHandlers,
  maxRetries = 3,
): Promise<void> {
  let lastStep = -1;
  for (let attempt = 0; attempt <= maxRetries; attempt++) {
    try {
      const resp = await fetch(url);
      if (!resp.ok || !resp.body) {
        throw new Error(`stream HTTP ${resp.status}`);
      }
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      const parser = new SseParser();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) {
          handlers.onEnd();
          return;
        }
        for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
          if (typeof event.step === "number") {
            lastStep = event.step;
          }
          handlers.onEvent(event);
          if (event.type === "run_end") {
            handlers.onEnd();
            return;
          }
        }
      }
    } catch {
      if (attempt < maxRetries && handlers.onGap) {
        handlers.onGap(lastStep);
      }
    }
  }
  handlers.onEnd();
}
