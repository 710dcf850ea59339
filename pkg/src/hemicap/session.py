"""Gamified capture state machine: countdown, frame intake, finish, ranking.

A session walks Configured -> Countdown -> Capturing -> Finished. During
capture, each submitted frame either hits an uncollected patch (the frame is
annotated and persisted, the rate rises) or is discarded. The mode flags only
gate what the client displays; they never change what is recorded, so ablation
runs stay comparable.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .annotate import AnnotationRecord, ObjectModel, annotate_bbox, camera_from_object
from .coverage import (
    CoverageState,
    HitThresholds,
    PatchLayout,
    build_hemisphere_layout,
    collection_rate,
    hit_test,
    mark_collected,
    patch_payload,
)
from .datastore import SCHEMA_VERSION, SessionStore, image_relpath
from .errors import (
    BehindCameraError,
    ConfigValidationError,
    DegenerateConfigurationError,
    MarkerBehindCameraError,
    NotVisibleError,
    SessionNotFoundError,
    SessionStateError,
)
from .geometry import CameraIntrinsics, Pose, quat_from_axis_angle
from .markers import MarkerSpec, estimate_marker_pose

COUNTDOWN_SECONDS = 5.0

MODE_FULL = "full"
MODE_NO_HEMISPHERE = "no-hm"
MODE_NO_RATE = "no-cr"
MODE_NO_ELAPSED = "no-et"
MODE_NAMES = (MODE_FULL, MODE_NO_HEMISPHERE, MODE_NO_RATE, MODE_NO_ELAPSED)

# The hemisphere sits above the table the marker lies on: the marker's outward
# normal (+Z) becomes the layout's up axis (+Y). Sessions may override this
# mounting transform; it is recorded in the manifest either way.
DEFAULT_LAYOUT_FROM_MARKER = Pose(
    quat_from_axis_angle((1.0, 0.0, 0.0), -math.pi / 2.0), (0.0, 0.0, 0.0)
)


class Phase(str, Enum):
    CONFIGURED = "configured"
    COUNTDOWN = "countdown"
    CAPTURING = "capturing"
    FINISHED = "finished"


@dataclass(frozen=True)
class ModeFlags:
    """Display toggles; only the four study modes are valid (at most one off)."""

    show_hemisphere: bool = True
    show_rate: bool = True
    show_elapsed: bool = True

    @property
    def name(self) -> str:
        if not self.show_hemisphere:
            return MODE_NO_HEMISPHERE
        if not self.show_rate:
            return MODE_NO_RATE
        if not self.show_elapsed:
            return MODE_NO_ELAPSED
        return MODE_FULL

    def is_valid(self) -> bool:
        off = (not self.show_hemisphere) + (not self.show_rate) + (not self.show_elapsed)
        return off <= 1

    @staticmethod
    def from_name(name: str) -> "ModeFlags":
        if name not in MODE_NAMES:
            raise ValueError(f"unknown mode {name!r}; expected one of {MODE_NAMES}")
        return ModeFlags(
            show_hemisphere=name != MODE_NO_HEMISPHERE,
            show_rate=name != MODE_NO_RATE,
            show_elapsed=name != MODE_NO_ELAPSED,
        )

    def to_dict(self) -> dict:
        return {
            "show_hemisphere": self.show_hemisphere,
            "show_rate": self.show_rate,
            "show_elapsed": self.show_elapsed,
        }

    @staticmethod
    def from_dict(d: dict) -> "ModeFlags":
        return ModeFlags(
            show_hemisphere=bool(d["show_hemisphere"]),
            show_rate=bool(d["show_rate"]),
            show_elapsed=bool(d["show_elapsed"]),
        )


@dataclass(frozen=True)
class SessionConfig:
    """Capture parameters fixed at session start."""

    target_count: int  # images to collect; also the patch count
    marker_size: float  # meters
    display_radius: float  # hemisphere radius, meters
    mode: ModeFlags
    thresholds: HitThresholds
    intrinsics: CameraIntrinsics
    marker_spec: MarkerSpec
    object_model: ObjectModel
    layout_from_marker: Pose = DEFAULT_LAYOUT_FROM_MARKER
    synthetic_images: bool = False

    def validation_errors(self) -> dict:
        errors = {}
        if not (isinstance(self.target_count, int) and self.target_count >= 2):
            errors["target_count"] = (
                f"must be an integer >= 2 (hemisphere layout needs at least 2 patches), "
                f"got {self.target_count!r}"
            )
        if not self.marker_size > 0:
            errors["marker_size"] = f"must be positive, got {self.marker_size!r}"
        elif self.marker_size != self.marker_spec.side_length:
            errors["marker_size"] = (
                f"marker_size {self.marker_size} does not match "
                f"marker_spec.side_length {self.marker_spec.side_length}"
            )
        if not self.display_radius > 0:
            errors["display_radius"] = f"must be positive, got {self.display_radius!r}"
        if not self.mode.is_valid():
            errors["mode"] = "at most one display flag may be off"
        return errors

    def validate(self) -> None:
        errors = self.validation_errors()
        if errors:
            raise ConfigValidationError(errors)

    def to_dict(self) -> dict:
        return {
            "target_count": self.target_count,
            "marker_size": self.marker_size,
            "display_radius": self.display_radius,
            "mode": self.mode.to_dict(),
            "thresholds": self.thresholds.to_dict(),
            "intrinsics": self.intrinsics.to_dict(),
            "marker_spec": self.marker_spec.to_dict(),
            "object_model": self.object_model.to_dict(),
            "layout_from_marker": self.layout_from_marker.to_dict(),
            "synthetic_images": self.synthetic_images,
        }

    @staticmethod
    def from_dict(d: dict) -> "SessionConfig":
        return SessionConfig(
            target_count=int(d["target_count"]),
            marker_size=float(d["marker_size"]),
            display_radius=float(d["display_radius"]),
            mode=ModeFlags.from_dict(d["mode"]),
            thresholds=HitThresholds.from_dict(d["thresholds"]),
            intrinsics=CameraIntrinsics.from_dict(d["intrinsics"]),
            marker_spec=MarkerSpec.from_dict(d["marker_spec"]),
            object_model=ObjectModel.from_dict(d["object_model"]),
            layout_from_marker=Pose.from_dict(d["layout_from_marker"]),
            synthetic_images=bool(d.get("synthetic_images", False)),
        )


@dataclass(frozen=True)
class FrameRecord:
    """One stored image with its pose, patch, and annotation."""

    image_id: int
    image_ref: str
    cam_from_layout: Pose
    patch_index: int
    annotation: AnnotationRecord
    timestamp_ms: int

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "image_ref": self.image_ref,
            "cam_from_layout": self.cam_from_layout.to_dict(),
            "patch_index": self.patch_index,
            "annotation": self.annotation.to_dict(),
            "timestamp_ms": self.timestamp_ms,
        }

    @staticmethod
    def from_dict(d: dict) -> "FrameRecord":
        return FrameRecord(
            image_id=int(d["image_id"]),
            image_ref=str(d["image_ref"]),
            cam_from_layout=Pose.from_dict(d["cam_from_layout"]),
            patch_index=int(d["patch_index"]),
            annotation=AnnotationRecord.from_dict(d["annotation"]),
            timestamp_ms=int(d["timestamp_ms"]),
        )


FRAME_HIT = "hit"
FRAME_NO_MARKER = "no_marker"
FRAME_NO_HIT = "no_hit"
FRAME_POSE_ERROR = "pose_error"
FRAME_NOT_VISIBLE = "not_visible"


@dataclass(frozen=True)
class FrameResult:
    """Outcome of one submitted frame."""

    status: str
    rate_percent: float
    elapsed_s: float
    finished: bool
    pose: Optional[Pose] = None  # cam_from_layout when estimation succeeded
    hit_index: Optional[int] = None
    annotation: Optional[AnnotationRecord] = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "rate_percent": self.rate_percent,
            "elapsed_s": self.elapsed_s,
            "finished": self.finished,
            "pose": self.pose.to_dict() if self.pose is not None else None,
            "hit_index": self.hit_index,
            "annotation": self.annotation.to_dict() if self.annotation is not None else None,
            "message": self.message,
        }


@dataclass(frozen=True)
class RankingEntry:
    rank: int
    mode: str
    performance: float  # seconds per image
    capture_time: float  # seconds
    image_count: int
    session_id: str = ""

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "mode": self.mode,
            "performance": self.performance,
            "capture_time": self.capture_time,
            "image_count": self.image_count,
            "session_id": self.session_id,
        }


def ranking(store: SessionStore) -> list:
    """Finished sessions ranked by capture time, fastest first.

    Ties go to the earlier finish (the ranking file preserves finish order and
    the sort is stable).
    """
    entries = store.load_ranking_entries()
    ordered = sorted(entries, key=lambda e: e["capture_time_s"])
    return [
        RankingEntry(
            rank=i,
            mode=e["mode"],
            performance=e["capture_time_s"] / e["image_count"],
            capture_time=e["capture_time_s"],
            image_count=e["image_count"],
            session_id=e.get("session_id", ""),
        )
        for i, e in enumerate(ordered, start=1)
    ]


@dataclass
class _Session:
    session_id: str
    config: SessionConfig
    layout: PatchLayout
    countdown_start: float
    phase: Phase = Phase.COUNTDOWN
    coverage: CoverageState = None
    frames: list = field(default_factory=list)
    started_at: Optional[float] = None
    capture_time_s: Optional[float] = None
    last_result: Optional[FrameResult] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        if self.coverage is None:
            self.coverage = CoverageState.fresh(self.config.target_count)


class SessionEngine:
    """Owns live sessions; one logical writer per session, concurrent reads ok."""

    def __init__(self, store: SessionStore, clock=time.monotonic):
        self.store = store
        self.clock = clock
        self._sessions: dict = {}
        self._registry_lock = threading.Lock()

    def start_session(self, config: SessionConfig) -> str:
        """Validate config, persist an empty manifest, enter the 5 s countdown."""
        config.validate()
        layout = build_hemisphere_layout(config.target_count, config.display_radius)
        with self._registry_lock:
            session_id = self.store.new_session_id()
            manifest = {
                "schema_version": SCHEMA_VERSION,
                "session_id": session_id,
                "config": config.to_dict(),
                "layout": {
                    "n_patches": layout.n_patches,
                    "radius": layout.radius,
                    "patch_half_angle": layout.patch_half_angle,
                    "layout_from_marker": config.layout_from_marker.to_dict(),
                },
                "frames": [],
                "capture_time_s": None,
                "finished": False,
            }
            self.store.init_session(session_id, manifest)
            self._sessions[session_id] = _Session(
                session_id=session_id,
                config=config,
                layout=layout,
                countdown_start=self.clock(),
            )
        return session_id

    def _get(self, session_id: str) -> _Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise SessionNotFoundError(f"no session {session_id!r}")
        return session

    def _advance_phase(self, session: _Session) -> None:
        if session.phase is Phase.COUNTDOWN:
            if self.clock() - session.countdown_start >= COUNTDOWN_SECONDS:
                session.phase = Phase.CAPTURING
                session.started_at = session.countdown_start + COUNTDOWN_SECONDS

    def _elapsed(self, session: _Session) -> float:
        if session.phase is Phase.FINISHED:
            return session.capture_time_s
        if session.phase is Phase.CAPTURING:
            return max(self.clock() - session.started_at, 0.0)
        return 0.0

    def submit_frame(self, session_id: str, image_bytes: bytes, observations,
                     timestamp_ms: int) -> FrameResult:
        """Process one captured frame; persists it only when it hits a patch."""
        session = self._get(session_id)
        with session.lock:
            self._advance_phase(session)
            if session.phase is not Phase.CAPTURING:
                raise SessionStateError(
                    f"session {session_id} is {session.phase.value}, not capturing"
                )
            result = self._process_frame(session, image_bytes, observations, timestamp_ms)
            session.last_result = result
            return result

    def _process_frame(self, session: _Session, image_bytes, observations,
                       timestamp_ms: int) -> FrameResult:
        config = session.config

        def result(status, pose=None, hit_index=None, annotation=None, message=""):
            return FrameResult(
                status=status,
                rate_percent=collection_rate(session.coverage),
                elapsed_s=self._elapsed(session),
                finished=session.phase is Phase.FINISHED,
                pose=pose,
                hit_index=hit_index,
                annotation=annotation,
                message=message,
            )

        obs = next(
            (o for o in observations if o.marker_id == config.marker_spec.id), None
        )
        if obs is None:
            return result(FRAME_NO_MARKER, message="configured marker not observed")

        try:
            cam_from_marker = estimate_marker_pose(obs, config.intrinsics, config.marker_spec)
        except (DegenerateConfigurationError, MarkerBehindCameraError, BehindCameraError) as exc:
            return result(FRAME_POSE_ERROR, message=str(exc))

        cam_from_layout = cam_from_marker.compose(config.layout_from_marker.inverse())
        idx = hit_test(
            cam_from_layout, config.intrinsics, session.layout, session.coverage,
            config.thresholds,
        )
        if idx is None:
            return result(FRAME_NO_HIT, pose=cam_from_layout)

        image_id = session.coverage.collected_count + 1
        try:
            annotation = annotate_bbox(
                config.intrinsics,
                camera_from_object(cam_from_marker, config.object_model),
                config.object_model,
                image_id=image_id,
            )
        except NotVisibleError as exc:
            return result(FRAME_NOT_VISIBLE, pose=cam_from_layout, message=str(exc))

        frame = FrameRecord(
            image_id=image_id,
            image_ref=image_relpath(image_id),
            cam_from_layout=cam_from_layout,
            patch_index=idx,
            annotation=annotation,
            timestamp_ms=int(timestamp_ms),
        )
        self.store.persist_frame(session.session_id, image_bytes, frame)
        mark_collected(session.coverage, idx)
        session.frames.append(frame)

        if session.coverage.collected_count == config.target_count:
            # Capture time is anchored to frame timestamps so replays of the
            # same stream reproduce it exactly.
            session.capture_time_s = timestamp_ms / 1000.0
            session.phase = Phase.FINISHED
            self.store.finalize_session(session.session_id, session.capture_time_s)
            self.store.append_ranking_entry(
                {
                    "session_id": session.session_id,
                    "mode": config.mode.name,
                    "capture_time_s": session.capture_time_s,
                    "image_count": config.target_count,
                }
            )
        return result(FRAME_HIT, pose=cam_from_layout, hit_index=idx, annotation=annotation)

    def session_status(self, session_id: str) -> dict:
        """Live status snapshot; patch states are always present, the mode flags
        only tell the client what to display."""
        session = self._get(session_id)
        with session.lock:
            self._advance_phase(session)
            countdown_remaining = 0.0
            if session.phase is Phase.COUNTDOWN:
                countdown_remaining = max(
                    COUNTDOWN_SECONDS - (self.clock() - session.countdown_start), 0.0
                )
            return {
                "session_id": session_id,
                "phase": session.phase.value,
                "rate_percent": collection_rate(session.coverage),
                "elapsed_s": self._elapsed(session),
                "countdown_remaining_s": countdown_remaining,
                "show_hemisphere": session.config.mode.show_hemisphere,
                "show_rate": session.config.mode.show_rate,
                "show_elapsed": session.config.mode.show_elapsed,
                "target_count": session.config.target_count,
                "patches": patch_payload(session.layout, session.coverage),
                "last_frame_result": (
                    session.last_result.to_dict() if session.last_result else None
                ),
            }

    def ranking(self) -> list:
        return ranking(self.store)
