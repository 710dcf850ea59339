// Observation sources: where marker corner detections come from.
//
// Two implementations ship: a deterministic replay-from-file source (used by
// the tests and for demos without a camera) and an adapter slot for a
// third-party pixel-level detector running on the live video element.

import type { ObservationPayload, ReplayEntry } from "./types.js";

export interface ObservationSource {
  /** Next frame's observations, or null when the stream has ended. */
  next(): Promise<ReplayEntry | null>;
}

export class ReplaySource implements ObservationSource {
  private cursor = 0;

  constructor(private entries: ReplayEntry[]) {}

  async next(): Promise<ReplayEntry | null> {
    if (this.cursor >= this.entries.length) {
      return null;
    }
    return this.entries[this.cursor++];
  }

  static parse(text: string): ReplaySource {
    const entries = JSON.parse(text) as ReplayEntry[];
    if (!Array.isArray(entries)) {
      throw new Error("replay file must be a JSON array of frames");
    }
    return new ReplaySource(entries);
  }
}

/** Contract for plugging in a real marker detector; not implemented here. */
export interface DetectorAdapter {
  detect(video: HTMLVideoElement, timestampMs: number): Promise<ObservationPayload[]>;
}

/** Wraps a DetectorAdapter and the camera video element as a source that
 * produces one entry per animation tick, timestamped from capture start. */
export class LiveDetectorSource implements ObservationSource {
  private startedAt: number | null = null;

  constructor(
    private adapter: DetectorAdapter,
    private video: HTMLVideoElement,
    private now: () => number = () => performance.now(),
  ) {}

  async next(): Promise<ReplayEntry | null> {
    if (this.startedAt === null) {
      this.startedAt = this.now();
    }
    const timestampMs = Math.round(this.now() - this.startedAt);
    const observations = await this.adapter.detect(this.video, timestampMs);
    return { timestamp_ms: timestampMs, observations };
  }
}
