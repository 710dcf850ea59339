"""Marker-based automatic bounding-box annotation with gamified multi-view
coverage tracking: spiral hemisphere viewpoint patches, camera pose from
marker corners, live session state, ranking, dataset persistence, and
variability metrics."""

from .annotate import (
    AnnotationRecord,
    ObjectModel,
    annotate_bbox,
    box_corners,
    camera_from_object,
)
from .coverage import (
    CoverageState,
    HitThresholds,
    PatchLayout,
    build_hemisphere_layout,
    collection_rate,
    hit_test,
    mark_collected,
    min_pairwise_separation,
)
from .datastore import (
    SessionStore,
    export_annotations,
    list_finished,
    load_session,
    persist_frame,
)
from .geometry import (
    CameraIntrinsics,
    Pose,
    angular_distance,
    look_at_rotation,
    project_point,
    project_points,
    quat_from_axis_angle,
    quat_multiply,
    quat_rotate,
    spherical_to_cartesian,
)
from .markers import (
    MarkerObservation,
    MarkerSpec,
    estimate_homography,
    estimate_marker_pose,
    marker_corners_3d,
    pose_from_homography,
)
from .metrics import VariabilityReport, id_rate, variability_report
from .session import (
    FrameRecord,
    FrameResult,
    ModeFlags,
    Phase,
    RankingEntry,
    SessionConfig,
    SessionEngine,
    ranking,
)
from .simcam import (
    ManualClock,
    PLACEHOLDER_PNG,
    record_replay,
    run_simulated_session,
    scripted_trajectory,
    synth_observation,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord",
    "CameraIntrinsics",
    "CoverageState",
    "FrameRecord",
    "FrameResult",
    "HitThresholds",
    "ManualClock",
    "MarkerObservation",
    "MarkerSpec",
    "ModeFlags",
    "ObjectModel",
    "PatchLayout",
    "Phase",
    "PLACEHOLDER_PNG",
    "Pose",
    "RankingEntry",
    "SessionConfig",
    "SessionEngine",
    "SessionStore",
    "VariabilityReport",
    "angular_distance",
    "annotate_bbox",
    "box_corners",
    "build_hemisphere_layout",
    "camera_from_object",
    "collection_rate",
    "estimate_homography",
    "estimate_marker_pose",
    "export_annotations",
    "hit_test",
    "id_rate",
    "list_finished",
    "load_session",
    "look_at_rotation",
    "mark_collected",
    "marker_corners_3d",
    "min_pairwise_separation",
    "persist_frame",
    "pose_from_homography",
    "project_point",
    "project_points",
    "quat_from_axis_angle",
    "quat_multiply",
    "quat_rotate",
    "ranking",
    "record_replay",
    "run_simulated_session",
    "scripted_trajectory",
    "spherical_to_cartesian",
    "synth_observation",
    "variability_report",
]
