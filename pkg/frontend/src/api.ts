// Typed client for the capture service. The fetch implementation is
// injectable so tests can replay recorded transcripts.

import type {
  FrameResultPayload,
  RankingEntryPayload,
  ReplayEntry,
  SessionConfigPayload,
  StatusPayload,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(detail)}`);
  }
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    throw new ApiError(resp.status, body && (body as { detail?: unknown }).detail);
  }
  return body as T;
}

export class ApiClient {
  private fetchImpl: FetchLike;

  constructor(
    private baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  async createSession(config: SessionConfigPayload): Promise<string> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    const body = await parseOrThrow<{ session_id: string }>(resp);
    return body.session_id;
  }

  async submitFrame(
    sessionId: string,
    image: Blob,
    entry: ReplayEntry,
  ): Promise<FrameResultPayload> {
    const form = new FormData();
    form.append("image", image, "frame.png");
    form.append("observations", JSON.stringify(entry));
    const resp = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/frames`,
      { method: "POST", body: form },
    );
    return parseOrThrow<FrameResultPayload>(resp);
  }

  async status(sessionId: string): Promise<StatusPayload> {
    const resp = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/status`,
    );
    return parseOrThrow<StatusPayload>(resp);
  }

  async ranking(): Promise<RankingEntryPayload[]> {
    const resp = await this.fetchImpl(`${this.baseUrl}/ranking`);
    return parseOrThrow<RankingEntryPayload[]>(resp);
  }
}

// 1x1 grayscale PNG used as the frame payload when no real camera image is
// attached (replay-driven sessions; the server treats image bytes as opaque).
const PLACEHOLDER_PNG_BASE64 =
  "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAAAAAA6fptVAAAACklEQVR4nGNgAAAAAgABSK+kcQAAAABJRU5ErkJggg==";

export function placeholderImage(): Blob {
  const raw = atob(PLACEHOLDER_PNG_BASE64);
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) {
    bytes[i] = raw.charCodeAt(i);
  }
  return new Blob([bytes], { type: "image/png" });
}
