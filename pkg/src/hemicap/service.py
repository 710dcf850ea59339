"""HTTP/JSON boundary between the engine and clients (UI, CLI, simulator).

Clients submit marker corner observations, not raw images for detection: the
pixel-level detector stays pluggable on the client side while the server owns
all geometry. Status is polled; per-session frame posts serialize on the
session lock, so the final state is independent of request interleaving.
"""

from __future__ import annotations

import json
import os
from typing import List, Optional

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import Response
from pydantic import BaseModel, ConfigDict, Field, ValidationError

import numpy as np

from .annotate import ObjectModel
from .coverage import HitThresholds
from .datastore import SessionStore
from .errors import (
    ConfigValidationError,
    SessionNotFoundError,
    SessionStateError,
)
from .geometry import CameraIntrinsics, Pose
from .markers import MarkerObservation, MarkerSpec
from .session import ModeFlags, SessionConfig, SessionEngine

API_SCHEMA_VERSION = 1

STORE_ROOT_ENV = "HEMICAP_STORE_ROOT"
DEFAULT_STORE_ROOT = "./hemicap-data"


class PoseIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    rotation: List[float] = Field(min_length=4, max_length=4)
    translation: List[float] = Field(min_length=3, max_length=3)

    def build(self) -> Pose:
        return Pose(np.asarray(self.rotation), np.asarray(self.translation))


_IDENTITY_POSE = {"rotation": [1.0, 0.0, 0.0, 0.0], "translation": [0.0, 0.0, 0.0]}


class ModeIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    show_hemisphere: bool = True
    show_rate: bool = True
    show_elapsed: bool = True


class ThresholdsIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    center_px_radius: float
    min_distance: float
    max_distance: float


class IntrinsicsIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int


class MarkerSpecIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    id: int
    side_length: float
    object_from_marker: PoseIn = PoseIn(**_IDENTITY_POSE)


class ObjectModelIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    class_id: int
    class_name: str
    object_from_marker: PoseIn = PoseIn(**_IDENTITY_POSE)
    extent_box: List[List[float]] = Field(min_length=8, max_length=8)


class SessionConfigIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    target_count: int
    marker_size: float
    display_radius: float
    mode: ModeIn = ModeIn()
    thresholds: Optional[ThresholdsIn] = None  # defaults derive from intrinsics
    intrinsics: IntrinsicsIn
    marker_spec: MarkerSpecIn
    object_model: ObjectModelIn
    layout_from_marker: Optional[PoseIn] = None
    synthetic_images: bool = False

    def build(self) -> SessionConfig:
        intrinsics = CameraIntrinsics(
            fx=self.intrinsics.fx, fy=self.intrinsics.fy,
            cx=self.intrinsics.cx, cy=self.intrinsics.cy,
            width=self.intrinsics.width, height=self.intrinsics.height,
        )
        if self.thresholds is None:
            thresholds = HitThresholds.defaults(intrinsics)
        else:
            thresholds = HitThresholds(
                center_px_radius=self.thresholds.center_px_radius,
                min_distance=self.thresholds.min_distance,
                max_distance=self.thresholds.max_distance,
            )
        kwargs = {}
        if self.layout_from_marker is not None:
            kwargs["layout_from_marker"] = self.layout_from_marker.build()
        return SessionConfig(
            target_count=self.target_count,
            marker_size=self.marker_size,
            display_radius=self.display_radius,
            mode=ModeFlags(
                show_hemisphere=self.mode.show_hemisphere,
                show_rate=self.mode.show_rate,
                show_elapsed=self.mode.show_elapsed,
            ),
            thresholds=thresholds,
            intrinsics=intrinsics,
            marker_spec=MarkerSpec(
                id=self.marker_spec.id,
                side_length=self.marker_spec.side_length,
                object_from_marker=self.marker_spec.object_from_marker.build(),
            ),
            object_model=ObjectModel(
                class_id=self.object_model.class_id,
                class_name=self.object_model.class_name,
                object_from_marker=self.object_model.object_from_marker.build(),
                extent_box=np.asarray(self.object_model.extent_box),
            ),
            synthetic_images=self.synthetic_images,
            **kwargs,
        )


class ObservationIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    marker_id: int
    corners: List[List[float]] = Field(min_length=4, max_length=4)
    timestamp_ms: Optional[int] = None


class FramePayloadIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    timestamp_ms: int
    observations: List[ObservationIn]


def create_app(engine: SessionEngine) -> FastAPI:
    app = FastAPI(title="hemicap", version="0.1.0")

    @app.post("/sessions", status_code=201)
    def create_session(config: SessionConfigIn):
        try:
            built = config.build()
        except (ValueError, ConfigValidationError) as exc:
            raise HTTPException(status_code=422, detail=_validation_detail(exc))
        try:
            session_id = engine.start_session(built)
        except ConfigValidationError as exc:
            raise HTTPException(status_code=422, detail=_validation_detail(exc))
        return {"schema_version": API_SCHEMA_VERSION, "session_id": session_id}

    @app.post("/sessions/{session_id}/frames")
    def submit_frame(session_id: str,
                     image: UploadFile = File(...),
                     observations: str = Form(...)):
        try:
            payload = FramePayloadIn.model_validate(json.loads(observations))
        except (json.JSONDecodeError, ValidationError) as exc:
            raise HTTPException(status_code=422, detail=f"malformed observations: {exc}")
        try:
            parsed = [
                MarkerObservation(
                    marker_id=o.marker_id,
                    corners=np.asarray(o.corners),
                    timestamp_ms=(o.timestamp_ms if o.timestamp_ms is not None
                                  else payload.timestamp_ms),
                )
                for o in payload.observations
            ]
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=f"malformed observations: {exc}")
        image_bytes = image.file.read()
        try:
            result = engine.submit_frame(
                session_id, image_bytes, parsed, payload.timestamp_ms
            )
        except SessionNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except SessionStateError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"schema_version": API_SCHEMA_VERSION, **result.to_dict()}

    @app.get("/sessions/{session_id}/status")
    def session_status(session_id: str):
        try:
            status = engine.session_status(session_id)
        except SessionNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"schema_version": API_SCHEMA_VERSION, **status}

    @app.get("/ranking")
    def get_ranking():
        return [entry.to_dict() for entry in engine.ranking()]

    @app.get("/sessions/{session_id}/annotations")
    def get_annotations(session_id: str):
        if not engine.store.session_dir(session_id).exists():
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        try:
            data = engine.store.export_annotations(session_id)
        except SessionStateError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return Response(content=data, media_type="application/json")

    return app


def _validation_detail(exc) -> object:
    if isinstance(exc, ConfigValidationError):
        return {"errors": exc.fields}
    return str(exc)


def default_app() -> FastAPI:
    """App bound to the store root named by HEMICAP_STORE_ROOT (for uvicorn)."""
    root = os.environ.get(STORE_ROOT_ENV, DEFAULT_STORE_ROOT)
    return create_app(SessionEngine(SessionStore(root)))
