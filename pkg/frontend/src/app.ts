// Capture session UI: configuration form, countdown, live overlay view with
// mode-gated rate/elapsed readouts, "Finish!" screen, and the ranking table.

import { ApiClient, ApiError, placeholderImage } from "./api.js";
import type { ObservationSource } from "./detector.js";
import { computeOverlay, OverlayModel, paintOverlay } from "./overlay.js";
import type {
  PosePayload,
  RankingEntryPayload,
  SessionConfigPayload,
  StatusPayload,
} from "./types.js";

export const MODES = ["full", "no-hm", "no-cr", "no-et"] as const;
export type ModeName = (typeof MODES)[number];

export interface FormParams {
  targetCount: number;
  markerSize: number;
  displayRadius: number;
  mode: ModeName;
}

const MODE_LABELS: Record<ModeName, string> = {
  full: "full (hemisphere + rate + elapsed)",
  "no-hm": "without hemisphere",
  "no-cr": "without collection rate",
  "no-et": "without elapsed time",
};

/** Fill the fixed capture parameters around the four user-facing ones. */
export function buildConfig(params: FormParams): SessionConfigPayload {
  return {
    target_count: params.targetCount,
    marker_size: params.markerSize,
    display_radius: params.displayRadius,
    mode: {
      show_hemisphere: params.mode !== "no-hm",
      show_rate: params.mode !== "no-cr",
      show_elapsed: params.mode !== "no-et",
    },
    intrinsics: { fx: 600, fy: 600, cx: 320, cy: 240, width: 640, height: 480 },
    marker_spec: { id: 7, side_length: params.markerSize },
    object_model: {
      class_id: 1,
      class_name: "target",
      extent_box: boxCorners(0.12, 0.12, 0.12),
    },
  };
}

function boxCorners(sx: number, sy: number, sz: number): number[][] {
  const out: number[][] = [];
  for (const dx of [-1, 1]) {
    for (const dy of [-1, 1]) {
      for (const dz of [-1, 1]) {
        out.push([(dx * sx) / 2, (dy * sy) / 2, (dz * sz) / 2]);
      }
    }
  }
  return out;
}

export function validateForm(raw: {
  targetCount: string;
  markerSize: string;
  displayRadius: string;
  mode: string;
}): { params?: FormParams; errors: string[] } {
  const errors: string[] = [];
  const targetCount = Number(raw.targetCount);
  if (!Number.isInteger(targetCount) || targetCount < 2) {
    errors.push("target count must be an integer of at least 2");
  }
  const markerSize = Number(raw.markerSize);
  if (!Number.isFinite(markerSize) || markerSize <= 0) {
    errors.push("marker size must be a positive number of meters");
  }
  const displayRadius = Number(raw.displayRadius);
  if (!Number.isFinite(displayRadius) || displayRadius <= 0) {
    errors.push("displayed object size must be a positive number of meters");
  }
  if (!(MODES as readonly string[]).includes(raw.mode)) {
    errors.push("choose one of the four collection modes");
  }
  if (errors.length > 0) {
    return { errors };
  }
  return {
    params: {
      targetCount,
      markerSize,
      displayRadius,
      mode: raw.mode as ModeName,
    },
    errors,
  };
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export interface AppOptions {
  pollIntervalMs?: number;
  image?: () => Blob;
  /** Called after each frame's view refresh; used by progress listeners. */
  onRefresh?: (status: StatusPayload, overlay: OverlayModel) => void;
}

export class CaptureApp {
  sessionId: string | null = null;
  lastStatus: StatusPayload | null = null;
  lastPose: PosePayload | null = null;
  overlayModel: OverlayModel | null = null;

  private pollIntervalMs: number;
  private image: () => Blob;
  private onRefresh?: (status: StatusPayload, overlay: OverlayModel) => void;
  private config: SessionConfigPayload | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    options: AppOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 100;
    this.image = options.image ?? placeholderImage;
    this.onRefresh = options.onRefresh;
    this.renderSkeleton();
  }

  private renderSkeleton(): void {
    const modeOptions = MODES.map(
      (mode, i) => `
      <label class="mode-option">
        <input type="radio" name="mode" value="${mode}" ${i === 0 ? "checked" : ""}>
        ${MODE_LABELS[mode]}
      </label>`,
    ).join("\n");
    this.root.innerHTML = `
      <section class="view view-configure">
        <h2>Data collection setup</h2>
        <form class="config-form">
          <label>Target number of images
            <input name="targetCount" type="number" value="100">
          </label>
          <label>Marker size [m]
            <input name="markerSize" type="number" step="0.01" value="0.1">
          </label>
          <label>Displayed object size: hemisphere radius [m]
            <input name="displayRadius" type="number" step="0.05" value="0.4">
          </label>
          <fieldset class="mode-select"><legend>Collection mode</legend>
            ${modeOptions}
          </fieldset>
          <ul class="form-errors"></ul>
          <button type="submit" class="start-button">start data collection</button>
        </form>
      </section>
      <section class="view view-countdown" hidden>
        <div class="countdown-number"></div>
      </section>
      <section class="view view-capture" hidden>
        <div class="hud">
          <span class="rate"></span>
          <span class="elapsed"></span>
        </div>
        <div class="stage">
          <video class="camera" autoplay playsinline muted width="640" height="480"></video>
          <canvas class="overlay" width="640" height="480"></canvas>
        </div>
        <div class="frame-note"></div>
      </section>
      <section class="view view-finish" hidden>
        <div class="finish-banner">Finish!</div>
        <table class="ranking">
          <thead>
            <tr><th>Rank</th><th>Mode</th><th>Performance [s/image]</th>
                <th>Capture time [s]</th><th>Images</th></tr>
          </thead>
          <tbody></tbody>
        </table>
        <div class="ranking-empty" hidden>No finished sessions yet.</div>
      </section>`;
  }

  private el<T extends HTMLElement>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) {
      throw new Error(`missing element ${selector}`);
    }
    return node;
  }

  get videoElement(): HTMLVideoElement {
    return this.el<HTMLVideoElement>(".camera");
  }

  private show(view: "configure" | "countdown" | "capture" | "finish"): void {
    for (const section of Array.from(
      this.root.querySelectorAll<HTMLElement>(".view"),
    )) {
      section.hidden = !section.classList.contains(`view-${view}`);
    }
  }

  readForm(): { config?: SessionConfigPayload; errors: string[] } {
    const form = this.el<HTMLFormElement>(".config-form");
    const value = (name: string) =>
      form.querySelector<HTMLInputElement>(`input[name="${name}"]`)?.value ?? "";
    const mode =
      form.querySelector<HTMLInputElement>('input[name="mode"]:checked')?.value ?? "";
    const { params, errors } = validateForm({
      targetCount: value("targetCount"),
      markerSize: value("markerSize"),
      displayRadius: value("displayRadius"),
      mode,
    });
    this.showFormErrors(errors);
    return params ? { config: buildConfig(params), errors } : { errors };
  }

  private showFormErrors(errors: string[]): void {
    const list = this.el<HTMLUListElement>(".form-errors");
    list.innerHTML = errors.map((e) => `<li>${e}</li>`).join("");
  }

  /** Validate the form and, if clean, run a session fed by `source`. */
  async startFromForm(source: ObservationSource): Promise<boolean> {
    const { config, errors } = this.readForm();
    if (!config || errors.length > 0) {
      return false;
    }
    await this.runSession(config, source);
    return true;
  }

  async runSession(
    config: SessionConfigPayload,
    source: ObservationSource,
  ): Promise<void> {
    this.config = config;
    try {
      this.sessionId = await this.api.createSession(config);
    } catch (err) {
      if (err instanceof ApiError) {
        this.showFormErrors([`server rejected the configuration: ${err.message}`]);
        return;
      }
      throw err;
    }
    await this.awaitCountdown();
    const finished = await this.captureLoop(source);
    if (finished) {
      await this.showFinish();
    }
  }

  private async awaitCountdown(): Promise<void> {
    this.show("countdown");
    const number = this.el<HTMLElement>(".countdown-number");
    for (;;) {
      const status = await this.api.status(this.sessionId!);
      this.lastStatus = status;
      if (status.phase !== "countdown") {
        break;
      }
      number.textContent = String(Math.ceil(status.countdown_remaining_s));
      await sleep(this.pollIntervalMs);
    }
  }

  private async captureLoop(source: ObservationSource): Promise<boolean> {
    this.show("capture");
    // One frame request in flight at a time by construction: the source is
    // pulled only after the previous post and status refresh complete.
    for (;;) {
      const entry = await source.next();
      if (entry === null) {
        this.el<HTMLElement>(".frame-note").textContent =
          "observation source ended before the collection finished";
        return false;
      }
      const result = await this.api.submitFrame(
        this.sessionId!,
        this.image(),
        entry,
      );
      if (result.pose) {
        this.lastPose = result.pose;
      }
      const status = await this.api.status(this.sessionId!);
      this.refreshCaptureView(status, result.status);
      if (result.finished) {
        return true;
      }
    }
  }

  private refreshCaptureView(status: StatusPayload, note: string): void {
    this.lastStatus = status;
    const rate = this.el<HTMLElement>(".rate");
    rate.hidden = !status.show_rate;
    if (status.show_rate) {
      rate.textContent = `collection rate ${status.rate_percent.toFixed(0)}%`;
    }
    const elapsed = this.el<HTMLElement>(".elapsed");
    elapsed.hidden = !status.show_elapsed;
    if (status.show_elapsed) {
      elapsed.textContent = `elapsed ${status.elapsed_s.toFixed(1)} s`;
    }
    this.el<HTMLElement>(".frame-note").textContent = note;
    this.overlayModel = computeOverlay(
      status,
      this.config!.intrinsics,
      this.lastPose,
    );
    paintOverlay(this.el<HTMLCanvasElement>(".overlay"), this.overlayModel);
    this.onRefresh?.(status, this.overlayModel);
  }

  private async showFinish(): Promise<void> {
    this.show("finish");
    const entries = await this.api.ranking();
    this.renderRanking(entries);
  }

  renderRanking(entries: RankingEntryPayload[]): void {
    const tbody = this.el<HTMLTableSectionElement>(".ranking tbody");
    const empty = this.el<HTMLElement>(".ranking-empty");
    const table = this.el<HTMLTableElement>(".ranking");
    if (entries.length === 0) {
      table.hidden = true;
      empty.hidden = false;
      tbody.innerHTML = "";
      return;
    }
    table.hidden = false;
    empty.hidden = true;
    const ordered = [...entries].sort((a, b) => a.capture_time - b.capture_time);
    tbody.innerHTML = ordered
      .map((entry) => {
        const current = entry.session_id === this.sessionId ? ' class="current"' : "";
        return (
          `<tr${current}><td>${entry.rank}</td><td>${entry.mode}</td>` +
          `<td>${entry.performance.toFixed(2)}</td>` +
          `<td>${entry.capture_time.toFixed(1)}</td>` +
          `<td>${entry.image_count}</td></tr>`
        );
      })
      .join("");
  }
}
