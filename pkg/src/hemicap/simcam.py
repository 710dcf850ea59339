"""Synthetic camera harness: marker observations from ground-truth trajectories.

No images are rendered; simulated sessions persist a 1x1 placeholder PNG and
are flagged ``synthetic_images`` in their manifest. Geometry, not pixels, is
what these runs verify.
"""

from __future__ import annotations

import struct
import zlib
from typing import Callable, Iterable, Optional

import numpy as np

from .coverage import PatchLayout
from .datastore import SessionStore
from .geometry import CameraIntrinsics, Pose, look_at_rotation, project_point
from .markers import MarkerObservation, MarkerSpec, marker_corners_3d
from .session import COUNTDOWN_SECONDS, SessionConfig, SessionEngine


class ManualClock:
    """Deterministic clock for driving countdowns and elapsed time in tests."""

    def __init__(self, start: float = 0.0):
        self.now = float(start)

    def __call__(self) -> float:
        return self.now

    def advance(self, dt: float) -> None:
        self.now += dt


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def _make_placeholder_png() -> bytes:
    ihdr = struct.pack(">IIBBBBB", 1, 1, 8, 0, 0, 0, 0)  # 1x1, 8-bit grayscale
    idat = zlib.compress(b"\x00\x00")  # filter byte + one black pixel
    return (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", idat)
        + _png_chunk(b"IEND", b"")
    )


PLACEHOLDER_PNG = _make_placeholder_png()


def synth_observation(gt_cam_from_marker: Pose, K: CameraIntrinsics, spec: MarkerSpec,
                      noise_px: float = 0.0, rng: Optional[np.random.Generator] = None,
                      timestamp_ms: int = 0) -> MarkerObservation:
    """Project the marker corners through a ground-truth pose into an observation.

    Gaussian pixel noise of the given sigma is added per coordinate when
    ``noise_px > 0`` (an explicit seeded ``rng`` is then required). Corners
    behind the camera raise BehindCameraError.
    """
    corners = np.array(
        [project_point(K, gt_cam_from_marker, p) for p in marker_corners_3d(spec)]
    )
    if noise_px > 0:
        if rng is None:
            raise ValueError("noise_px > 0 requires a seeded rng")
        corners = corners + rng.normal(0.0, noise_px, size=corners.shape)
    return MarkerObservation(marker_id=spec.id, corners=corners, timestamp_ms=timestamp_ms)


def scripted_trajectory(layout: PatchLayout, standoff_factor: float) -> list:
    """One camera pose per patch, in patch order.

    Each pose (camera-in-layout-frame) stands ``standoff_factor * radius`` from
    the origin along the patch's center direction, looking back at the origin.
    """
    if not standoff_factor >= 1.0:
        raise ValueError(f"standoff_factor must be >= 1, got {standoff_factor}")
    origin = np.zeros(3)
    poses = []
    for center in layout.centers:
        position = standoff_factor * center
        poses.append(Pose(look_at_rotation(position, origin), position))
    return poses


def observation_for_pose(layout_from_cam: Pose, config: SessionConfig,
                         noise_px: float = 0.0, rng: Optional[np.random.Generator] = None,
                         timestamp_ms: int = 0) -> MarkerObservation:
    """Synthesize what the detector would report for a camera at this pose."""
    cam_from_marker = layout_from_cam.inverse().compose(config.layout_from_marker)
    return synth_observation(
        cam_from_marker, config.intrinsics, config.marker_spec,
        noise_px=noise_px, rng=rng, timestamp_ms=timestamp_ms,
    )


def run_simulated_session(config: SessionConfig, trajectory: Iterable[Pose],
                          store, noise_px: float = 0.0, seed: int = 0,
                          frame_period_ms: int = 100,
                          max_frames: Optional[int] = None,
                          on_result: Optional[Callable] = None,
                          engine: Optional[SessionEngine] = None) -> str:
    """Drive a full session through the engine along a trajectory; returns its id.

    With a noise-free scripted trajectory this finishes in exactly one
    submission per patch. The engine runs on a ManualClock advanced by
    ``frame_period_ms`` per frame, so results are fully deterministic for a
    fixed seed and trajectory. Raises RuntimeError if the trajectory ends (or
    ``max_frames`` is reached) before the session finishes.
    """
    if engine is None:
        clock = ManualClock()
        engine = SessionEngine(store if isinstance(store, SessionStore) else SessionStore(store),
                               clock=clock)
    else:
        clock = engine.clock
    if not isinstance(clock, ManualClock):
        raise ValueError("run_simulated_session requires an engine on a ManualClock")

    rng = np.random.default_rng(seed)
    session_id = engine.start_session(config)
    clock.advance(COUNTDOWN_SECONDS)

    timestamp_ms = 0
    for i, layout_from_cam in enumerate(trajectory):
        if max_frames is not None and i >= max_frames:
            break
        timestamp_ms += frame_period_ms
        clock.advance(frame_period_ms / 1000.0)
        obs = observation_for_pose(
            layout_from_cam, config, noise_px=noise_px, rng=rng, timestamp_ms=timestamp_ms
        )
        result = engine.submit_frame(session_id, PLACEHOLDER_PNG, [obs], timestamp_ms)
        if on_result is not None:
            on_result(result)
        if result.finished:
            return session_id
    raise RuntimeError("trajectory exhausted before the session finished")


def trajectory_to_dicts(trajectory: Iterable[Pose]) -> list:
    """Serialize a trajectory (camera poses in the layout frame) for JSON."""
    return [pose.to_dict() for pose in trajectory]


def trajectory_from_dicts(entries: Iterable[dict]) -> list:
    return [Pose.from_dict(d) for d in entries]


def record_replay(config: SessionConfig, trajectory: Iterable[Pose],
                  noise_px: float = 0.0, seed: int = 0,
                  frame_period_ms: int = 100) -> list:
    """Synthesize a replay file: one entry per frame with its observations.

    The format is what the browser client's replay source consumes: a JSON
    list of ``{"timestamp_ms": int, "observations": [{marker_id, corners}]}``.
    """
    rng = np.random.default_rng(seed)
    entries = []
    timestamp_ms = 0
    for layout_from_cam in trajectory:
        timestamp_ms += frame_period_ms
        obs = observation_for_pose(
            layout_from_cam, config, noise_px=noise_px, rng=rng, timestamp_ms=timestamp_ms
        )
        entries.append(
            {
                "timestamp_ms": timestamp_ms,
                "observations": [
                    {
                        "marker_id": obs.marker_id,
                        "corners": [[float(u), float(v)] for u, v in obs.corners],
                    }
                ],
            }
        )
    return entries
