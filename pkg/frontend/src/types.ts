// Wire payload shapes for the capture service API.

export interface ModeFlagsPayload {
  show_hemisphere: boolean;
  show_rate: boolean;
  show_elapsed: boolean;
}

export interface IntrinsicsPayload {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
}

export interface PosePayload {
  rotation: number[]; // quaternion [w, x, y, z]
  translation: number[]; // [x, y, z] meters
}

export interface ThresholdsPayload {
  center_px_radius: number;
  min_distance: number;
  max_distance: number;
}

export interface MarkerSpecPayload {
  id: number;
  side_length: number;
  object_from_marker?: PosePayload;
}

export interface ObjectModelPayload {
  class_id: number;
  class_name: string;
  object_from_marker?: PosePayload;
  extent_box: number[][];
}

export interface SessionConfigPayload {
  target_count: number;
  marker_size: number;
  display_radius: number;
  mode: ModeFlagsPayload;
  thresholds?: ThresholdsPayload;
  intrinsics: IntrinsicsPayload;
  marker_spec: MarkerSpecPayload;
  object_model: ObjectModelPayload;
  synthetic_images?: boolean;
}

export interface PatchPayload {
  index: number;
  center: number[];
  orientation: number[];
  half_angle: number;
  collected: boolean;
}

export interface AnnotationPayload {
  image_id: number;
  class_id: number;
  bbox: number[];
}

export interface FrameResultPayload {
  status: string;
  rate_percent: number;
  elapsed_s: number;
  finished: boolean;
  pose: PosePayload | null;
  hit_index: number | null;
  annotation: AnnotationPayload | null;
  message: string;
}

export interface StatusPayload {
  schema_version: number;
  session_id: string;
  phase: "configured" | "countdown" | "capturing" | "finished";
  rate_percent: number;
  elapsed_s: number;
  countdown_remaining_s: number;
  show_hemisphere: boolean;
  show_rate: boolean;
  show_elapsed: boolean;
  target_count: number;
  patches: PatchPayload[];
  last_frame_result: FrameResultPayload | null;
}

export interface RankingEntryPayload {
  rank: number;
  mode: string;
  performance: number;
  capture_time: number;
  image_count: number;
  session_id: string;
}

export interface ObservationPayload {
  marker_id: number;
  corners: number[][]; // 4 x [u, v], TL TR BR BL in the marker frame
}

// One frame of the replay file format: what the detector saw and when.
export interface ReplayEntry {
  timestamp_ms: number;
  observations: ObservationPayload[];
}
