"""Camera pose from a single square marker's four observed corner pixels.

The route is the classic planar one: normalized DLT homography from the
marker's plane coordinates to pixels, decomposition of ``K^-1 H`` into
rotation columns and translation, then Gauss-Newton refinement. Planar pose
has a two-fold ambiguity under noise; both candidate poses (the decomposition
and its tilt mirror about the line of sight) are refined and the one with the
smaller reprojection error wins.

Corner ordering contract (part of the wire format): corners are listed
top-left, top-right, bottom-right, bottom-left *in the marker's own frame*,
where marker +X points right, +Y up, and +Z along the outward face normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfigurationError, MarkerBehindCameraError, WrongMarkerError
from .geometry import CameraIntrinsics, Pose, matrix_to_quat, quat_to_matrix

# Relative singular-value floor below which the DLT system is considered
# rank-deficient (collinear points, repeated points, ...).
_RANK_TOL = 1e-9
_MIN_QUAD_AREA_PX2 = 1.0


@dataclass(frozen=True)
class MarkerSpec:
    """A square marker and its known mounting pose on the object jig."""

    id: int
    side_length: float  # meters
    object_from_marker: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        if not self.side_length > 0:
            raise ValueError(f"side_length must be positive, got {self.side_length}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "side_length": self.side_length,
            "object_from_marker": self.object_from_marker.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "MarkerSpec":
        return MarkerSpec(
            id=int(d["id"]),
            side_length=float(d["side_length"]),
            object_from_marker=Pose.from_dict(d["object_from_marker"]),
        )


@dataclass(frozen=True, eq=False)
class MarkerObservation:
    """One detected marker: id plus four corner pixels in the fixed order."""

    marker_id: int
    corners: np.ndarray  # (4, 2) pixels: TL, TR, BR, BL
    timestamp_ms: int = 0

    def __eq__(self, other):
        return (
            isinstance(other, MarkerObservation)
            and self.marker_id == other.marker_id
            and self.timestamp_ms == other.timestamp_ms
            and np.array_equal(self.corners, other.corners)
        )

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=np.float64)
        if c.shape != (4, 2):
            raise ValueError(f"corners must be (4, 2), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("corners contain non-finite values")
        if _quad_area(c) <= _MIN_QUAD_AREA_PX2:
            raise ValueError("corner quadrilateral is degenerate (area <= 1 px^2)")
        c.flags.writeable = False
        object.__setattr__(self, "corners", c)


def _quad_area(corners: np.ndarray) -> float:
    x, y = corners[:, 0], corners[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def marker_corners_3d(spec: MarkerSpec) -> np.ndarray:
    """Corner positions in the marker frame, ordered TL, TR, BR, BL; z = 0."""
    h = spec.side_length / 2.0
    return np.array(
        [[-h, h, 0.0], [h, h, 0.0], [h, -h, 0.0], [-h, -h, 0.0]]
    )


def _hartley_normalization(pts: np.ndarray) -> np.ndarray:
    """Similarity transform sending pts to centroid 0, mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    dist = np.linalg.norm(pts - centroid, axis=1).mean()
    if dist < 1e-12:
        raise DegenerateConfigurationError("all points coincide")
    s = np.sqrt(2.0) / dist
    return np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )


def estimate_homography(plane_points, pixels) -> np.ndarray:
    """Normalized-DLT homography mapping 2D plane points to pixels.

    Returns H with unit Frobenius norm and sign fixed so H[2,2] >= 0 when it is
    nonzero. Requires >= 4 correspondences with no 3 plane points collinear;
    rank-deficient systems raise DegenerateConfigurationError.
    """
    src = np.asarray(plane_points, dtype=np.float64)
    dst = np.asarray(pixels, dtype=np.float64)
    if src.ndim != 2 or src.shape[1] != 2 or src.shape != dst.shape:
        raise ValueError(f"correspondence shapes mismatch: {src.shape} vs {dst.shape}")
    n = src.shape[0]
    if n < 4:
        raise ValueError(f"need at least 4 correspondences, got {n}")
    if not (np.all(np.isfinite(src)) and np.all(np.isfinite(dst))):
        raise ValueError("correspondences contain non-finite values")

    t_src = _hartley_normalization(src)
    t_dst = _hartley_normalization(dst)
    src_h = np.column_stack([src, np.ones(n)]) @ t_src.T
    dst_h = np.column_stack([dst, np.ones(n)]) @ t_dst.T

    a = np.zeros((2 * n, 9))
    a[0::2, 0:3] = src_h
    a[0::2, 6:9] = -dst_h[:, 0:1] * src_h
    a[1::2, 3:6] = src_h
    a[1::2, 6:9] = -dst_h[:, 1:2] * src_h

    _, s, vt = np.linalg.svd(a)
    # A valid system has a one-dimensional null space: 8 significant singular
    # values. A second vanishing value means the homography is not unique.
    if s[7] <= _RANK_TOL * s[0]:
        raise DegenerateConfigurationError(
            "correspondences are degenerate (collinear or repeated points)"
        )
    h_norm = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_dst) @ h_norm @ t_src
    if h[2, 2] < 0:
        h = -h
    return h / np.linalg.norm(h)


def pose_from_homography(h, K: CameraIntrinsics) -> Pose:
    """Decompose a plane-to-pixel homography into a camera_from_marker pose.

    Columns of K^-1 H give r1, r2, t up to a common scale 2/(|c1|+|c2|);
    r3 = r1 x r2 and the rotation is re-orthonormalized by SVD projection.
    Raises MarkerBehindCameraError when the recovered depth is <= 0.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (3, 3):
        raise ValueError(f"homography must be 3x3, got {h.shape}")
    m = np.linalg.inv(K.matrix) @ h
    n1 = float(np.linalg.norm(m[:, 0]))
    n2 = float(np.linalg.norm(m[:, 1]))
    if n1 + n2 < 1e-12:
        raise DegenerateConfigurationError("homography has vanishing rotation columns")
    scale = 2.0 / (n1 + n2)
    r1 = m[:, 0] * scale
    r2 = m[:, 1] * scale
    t = m[:, 2] * scale
    if t[2] <= 0:
        raise MarkerBehindCameraError(f"recovered marker depth {t[2]:.3g} m is not positive")
    r0 = np.column_stack([r1, r2, np.cross(r1, r2)])
    u, _, vt = np.linalg.svd(r0)
    r = u @ vt
    if np.linalg.det(r) < 0:
        r = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return Pose(matrix_to_quat(r), t)


def _project_rt(K: CameraIntrinsics, r: np.ndarray, t: np.ndarray,
                pts3d: np.ndarray):
    cam = pts3d @ r.T + t
    z = cam[:, 2]
    if np.any(z <= 1e-9):
        return None, z
    pix = np.column_stack([K.fx * cam[:, 0] / z + K.cx, K.fy * cam[:, 1] / z + K.cy])
    return pix, z


def _reprojection_rmse(K: CameraIntrinsics, r, t, pts3d, pixels) -> float:
    pix, _ = _project_rt(K, r, t, pts3d)
    if pix is None:
        return float("inf")
    return float(np.sqrt(np.mean((pix - pixels) ** 2)))


def _rodrigues(w: np.ndarray) -> np.ndarray:
    angle = float(np.linalg.norm(w))
    if angle < 1e-12:
        return np.eye(3)
    k = w / angle
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * (kx @ kx)


def _refine_pose(K: CameraIntrinsics, r: np.ndarray, t: np.ndarray,
                 pts3d: np.ndarray, pixels: np.ndarray, iters: int = 15):
    """Damped Gauss-Newton on reprojection error over (rotation, translation)."""
    best_err = _reprojection_rmse(K, r, t, pts3d, pixels)
    for _ in range(iters):
        pix, z = _project_rt(K, r, t, pts3d)
        if pix is None:
            break
        residual = (pix - pixels).ravel()
        jac = np.zeros((2 * pts3d.shape[0], 6))
        cam = pts3d @ r.T + t
        for i, p in enumerate(cam):
            x, y, zi = p
            du = np.array([K.fx / zi, 0.0, -K.fx * x / zi**2])
            dv = np.array([0.0, K.fy / zi, -K.fy * y / zi**2])
            v = p - t  # rotation perturbation exp(w) acts on r @ X
            dp_dw = np.array([[0, v[2], -v[1]], [-v[2], 0, v[0]], [v[1], -v[0], 0]])
            jac[2 * i] = np.concatenate([du @ dp_dw, du])
            jac[2 * i + 1] = np.concatenate([dv @ dp_dw, dv])
        delta, *_ = np.linalg.lstsq(jac, -residual, rcond=None)
        step = 1.0
        improved = False
        for _ in range(6):
            r_new = _rodrigues(step * delta[:3]) @ r
            t_new = t + step * delta[3:]
            err = _reprojection_rmse(K, r_new, t_new, pts3d, pixels)
            if err < best_err:
                r, t, best_err = r_new, t_new, err
                improved = True
                break
            step *= 0.5
        if not improved or np.linalg.norm(delta) < 1e-14:
            break
    return r, t, best_err


def _mirror_candidate(r: np.ndarray, t: np.ndarray):
    """The second planar-pose solution: tilt mirrored about the line of sight."""
    sight = t / np.linalg.norm(t)
    normal = 2.0 * float(r[:, 2] @ sight) * sight - r[:, 2]
    x_axis = r[:, 0] - float(r[:, 0] @ normal) * normal
    nx = float(np.linalg.norm(x_axis))
    if nx < 1e-9:
        return None
    x_axis = x_axis / nx
    return np.column_stack([x_axis, np.cross(normal, x_axis), normal]), t.copy()


def estimate_marker_pose(obs: MarkerObservation, K: CameraIntrinsics,
                         spec: MarkerSpec) -> Pose:
    """Estimate camera_from_marker from a single marker observation.

    The homography decomposition seeds two candidate poses (itself and its
    planar-ambiguity mirror); both are refined against the observed corners and
    the positive-depth solution with the smaller reprojection error is kept.
    """
    if obs.marker_id != spec.id:
        raise WrongMarkerError(f"observation is marker {obs.marker_id}, expected {spec.id}")
    corners3d = marker_corners_3d(spec)
    h = estimate_homography(corners3d[:, :2], obs.corners)
    seed = pose_from_homography(h, K)

    r0 = quat_to_matrix(seed.rotation)
    t0 = np.array(seed.translation)
    candidates = [(r0, t0)]
    mirrored = _mirror_candidate(r0, t0)
    if mirrored is not None:
        candidates.append(mirrored)

    best = None
    best_err = float("inf")
    for r, t in candidates:
        r_ref, t_ref, err = _refine_pose(K, r, t, corners3d, obs.corners)
        if t_ref[2] > 0 and err < best_err:
            best, best_err = (r_ref, t_ref), err
    if best is None:
        return seed
    return Pose(matrix_to_quat(best[0]), best[1])
