"""2D bounding-box annotation from the camera pose and known object geometry.

The annotation is the axis-aligned hull of the object's projected 3D extent-box
corners, clipped to the image rectangle. Corners behind the camera are dropped
rather than clipped along edges; sessions keep the whole object in view, so
this is a documented limitation, not a practical one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotVisibleError
from .geometry import CameraIntrinsics, Pose, project_points


@dataclass(frozen=True, eq=False)
class ObjectModel:
    """Target object: class label, jig mounting pose, and 3D extent box."""

    class_id: int
    class_name: str
    object_from_marker: Pose
    extent_box: np.ndarray  # (8, 3) object-frame corners of the 3D bounding box

    def __eq__(self, other):
        return (
            isinstance(other, ObjectModel)
            and self.class_id == other.class_id
            and self.class_name == other.class_name
            and self.object_from_marker == other.object_from_marker
            and np.array_equal(self.extent_box, other.extent_box)
        )

    def __post_init__(self):
        if not self.class_name:
            raise ValueError("class_name must be non-empty")
        box = np.asarray(self.extent_box, dtype=np.float64)
        if box.shape != (8, 3):
            raise ValueError(f"extent_box must be (8, 3), got {box.shape}")
        if not np.all(np.isfinite(box)):
            raise ValueError("extent_box contains non-finite values")
        # A parallelepiped is centrally symmetric: every corner offset from the
        # centroid must have its negation among the offsets.
        offsets = box - box.mean(axis=0)
        scale = max(float(np.abs(offsets).max()), 1e-12)
        for off in offsets:
            if np.min(np.linalg.norm(offsets + off, axis=1)) > 1e-6 * scale:
                raise ValueError("extent_box corners do not form a valid box")
        box.flags.writeable = False
        object.__setattr__(self, "extent_box", box)

    def to_dict(self) -> dict:
        return {
            "class_id": self.class_id,
            "class_name": self.class_name,
            "object_from_marker": self.object_from_marker.to_dict(),
            "extent_box": [[float(c) for c in row] for row in self.extent_box],
        }

    @staticmethod
    def from_dict(d: dict) -> "ObjectModel":
        return ObjectModel(
            class_id=int(d["class_id"]),
            class_name=str(d["class_name"]),
            object_from_marker=Pose.from_dict(d["object_from_marker"]),
            extent_box=np.asarray(d["extent_box"], dtype=np.float64),
        )


def box_corners(size, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """(8, 3) corners of an axis-aligned box with full side lengths ``size``."""
    sx, sy, sz = (float(s) for s in np.broadcast_to(np.asarray(size, dtype=np.float64), (3,)))
    cx, cy, cz = (float(c) for c in center)
    return np.array(
        [
            [cx + dx * sx / 2, cy + dy * sy / 2, cz + dz * sz / 2]
            for dx in (-1, 1)
            for dy in (-1, 1)
            for dz in (-1, 1)
        ]
    )


@dataclass(frozen=True)
class AnnotationRecord:
    """One image's 2D bounding box and class label, in pixels."""

    image_id: int
    class_id: int
    bbox: tuple  # (xmin, ymin, xmax, ymax)

    def __post_init__(self):
        xmin, ymin, xmax, ymax = (float(v) for v in self.bbox)
        if not (0 <= xmin < xmax and 0 <= ymin < ymax):
            raise ValueError(f"invalid bbox {self.bbox}")
        object.__setattr__(self, "bbox", (xmin, ymin, xmax, ymax))

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "class_id": self.class_id,
            "bbox": list(self.bbox),
        }

    @staticmethod
    def from_dict(d: dict) -> "AnnotationRecord":
        return AnnotationRecord(
            image_id=int(d["image_id"]),
            class_id=int(d["class_id"]),
            bbox=tuple(float(v) for v in d["bbox"]),
        )


def camera_from_object(cam_from_marker: Pose, model: ObjectModel) -> Pose:
    """cam_from_object = cam_from_marker o (object_from_marker)^-1."""
    return cam_from_marker.compose(model.object_from_marker.inverse())


def annotate_bbox(K: CameraIntrinsics, cam_from_object: Pose, model: ObjectModel,
                  image_id: int = 0) -> AnnotationRecord:
    """Axis-aligned hull of the projected extent-box corners, clipped to the image.

    Raises NotVisibleError when every corner is behind the camera or the
    clipped hull is empty.
    """
    pixels, in_front = project_points(K, cam_from_object, model.extent_box)
    if not in_front.any():
        raise NotVisibleError("all extent-box corners are behind the camera")
    visible = pixels[in_front]
    xmin = max(float(visible[:, 0].min()), 0.0)
    ymin = max(float(visible[:, 1].min()), 0.0)
    xmax = min(float(visible[:, 0].max()), float(K.width))
    ymax = min(float(visible[:, 1].max()), float(K.height))
    if not (xmin < xmax and ymin < ymax):
        raise NotVisibleError("object projects entirely outside the image")
    return AnnotationRecord(image_id=image_id, class_id=model.class_id,
                            bbox=(xmin, ymin, xmax, ymax))
