"""Automatic bounding-box annotation.

Places a box-shaped object in front of the camera, projects its 3D extent box,
and prints the resulting 2D annotations for a few viewpoints, including a
partially off-screen case where the hull clips to the image edge.
"""

import numpy as np

from hemicap import (
    CameraIntrinsics,
    ObjectModel,
    annotate_bbox,
    box_corners,
    camera_from_object,
)
from hemicap.geometry import Pose, look_at_rotation, quat_from_axis_angle

K = CameraIntrinsics(fx=600.0, fy=600.0, cx=320.0, cy=240.0, width=640, height=480)
model = ObjectModel(
    class_id=1,
    class_name="teabox",
    object_from_marker=Pose(np.array([1.0, 0, 0, 0]), (0.0, 0.08, 0.0)),
    extent_box=box_corners((0.12, 0.08, 0.06)),
)

views = {
    "head-on at 0.6 m": (np.array([0.0, 0.0, -0.6]), np.zeros(3)),
    "upper left": (np.array([-0.35, 0.25, -0.5]), np.zeros(3)),
    "clipped at left edge": (np.array([0.0, 0.0, -0.6]), np.array([0.35, 0.0, 0.0])),
}

for label, (eye, target) in views.items():
    object_from_cam = Pose(look_at_rotation(eye, target), eye)
    record = annotate_bbox(K, object_from_cam.inverse(), model, image_id=1)
    xmin, ymin, xmax, ymax = record.bbox
    print(f"{label:24s} bbox ({xmin:6.1f}, {ymin:6.1f}, {xmax:6.1f}, {ymax:6.1f})  "
          f"size {xmax - xmin:5.1f} x {ymax - ymin:5.1f} px")

# The same record via the marker route: cam_from_marker composed with the
# known jig mounting gives cam_from_object.
cam_from_marker = Pose(quat_from_axis_angle((1, 0, 0), np.pi), (0.0, 0.08, 0.6))
record = annotate_bbox(K, camera_from_object(cam_from_marker, model), model, image_id=2)
print(f"{'via marker mounting':24s} bbox {tuple(round(v, 1) for v in record.bbox)}")
