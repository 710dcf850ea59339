// Browser bootstrap: wires the app to the same-origin service, the camera
// stream, and the selected observation source (replay file by default; a live
// detector can be registered via `registerDetector`).

import { ApiClient } from "./api.js";
import { CaptureApp } from "./app.js";
import {
  DetectorAdapter,
  LiveDetectorSource,
  ObservationSource,
  ReplaySource,
} from "./detector.js";

let liveDetector: DetectorAdapter | null = null;

/** Plug in a third-party marker detector (e.g. an aruco port). */
export function registerDetector(adapter: DetectorAdapter): void {
  liveDetector = adapter;
}

async function startCamera(video: HTMLVideoElement): Promise<void> {
  if (!navigator.mediaDevices?.getUserMedia) {
    return; // no camera available; replay-driven sessions still work
  }
  try {
    video.srcObject = await navigator.mediaDevices.getUserMedia({
      video: { width: 640, height: 480 },
      audio: false,
    });
  } catch (err) {
    console.warn("camera unavailable:", err);
  }
}

async function chooseSource(
  root: HTMLElement,
  video: HTMLVideoElement,
): Promise<ObservationSource | null> {
  const file = root.querySelector<HTMLInputElement>(".replay-input")?.files?.[0];
  if (file) {
    return ReplaySource.parse(await file.text());
  }
  if (liveDetector) {
    return new LiveDetectorSource(liveDetector, video);
  }
  return null;
}

export function boot(root: HTMLElement): CaptureApp {
  const app = new CaptureApp(root, new ApiClient(""));

  const form = root.querySelector<HTMLFormElement>(".config-form")!;
  const sourceRow = document.createElement("label");
  sourceRow.innerHTML =
    'Observation source: replay file <input class="replay-input" type="file" accept=".json">';
  form.insertBefore(sourceRow, form.querySelector(".form-errors"));

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      const source = await chooseSource(root, app.videoElement);
      if (!source) {
        root.querySelector(".form-errors")!.innerHTML =
          "<li>select a replay file or register a live detector</li>";
        return;
      }
      await startCamera(app.videoElement);
      await app.startFromForm(source);
    })();
  });
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document.getElementById("app")!);
}
