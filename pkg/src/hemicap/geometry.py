"""Core 3D math: spherical coordinates, quaternions, rigid poses, pinhole projection.

Conventions
-----------
- Vectors are float64 numpy arrays of shape (3,), meters unless stated otherwise.
- Quaternions are float64 numpy arrays ``[w, x, y, z]`` with unit norm; ``q`` and
  ``-q`` represent the same rotation.
- The layout frame is y-up: the polar angle ``phi`` is measured from +Y and the
  azimuth ``theta`` spins about +Y.
- A ``Pose`` named ``a_from_b`` maps points expressed in frame ``b`` into frame
  ``a``: ``p_a = a_from_b.transform(p_b)``.
- Cameras look along their local +Z axis; pixel ``u`` grows with camera +X and
  ``v`` with camera +Y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError

UNIT_NORM_TOL = 1e-9
MIN_CAMERA_DEPTH = 1e-6

# Alternate up axes tried, in order, when the caller's up vector is parallel to
# the viewing direction.
_FALLBACK_UPS = (np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 0.0]))


def as_vec3(v) -> np.ndarray:
    """Coerce to a finite (3,) float64 vector."""
    a = np.asarray(v, dtype=np.float64).reshape(-1)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {np.shape(v)}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"vector has non-finite components: {a}")
    return a


def spherical_to_cartesian(r: float, phi: float, theta: float) -> np.ndarray:
    """Map y-up spherical coordinates to a Cartesian point.

    ``phi`` is the angle from the +Y pole, ``theta`` the azimuth about +Y:
    returns ``(r sin(phi) sin(theta), r cos(phi), r sin(phi) cos(theta))``,
    so the result always has norm ``r``.
    """
    if not (math.isfinite(r) and math.isfinite(phi) and math.isfinite(theta)):
        raise ValueError(f"non-finite spherical input r={r} phi={phi} theta={theta}")
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    sin_phi = math.sin(phi)
    return np.array(
        [r * sin_phi * math.sin(theta), r * math.cos(phi), r * sin_phi * math.cos(theta)]
    )


def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(4)
    n = float(np.linalg.norm(q))
    if not math.isfinite(n) or n < 1e-12:
        raise ValueError(f"cannot normalize quaternion {q}")
    return q / n


def quat_multiply(a, b) -> np.ndarray:
    """Hamilton product a*b (apply b's rotation first, then a's)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q) -> np.ndarray:
    w, x, y, z = q
    return np.array([w, -x, -y, -z])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = as_vec3(axis)
    n = float(np.linalg.norm(axis))
    if n < 1e-12:
        raise ValueError("rotation axis must be nonzero")
    half = 0.5 * angle
    return np.concatenate(([math.cos(half)], math.sin(half) / n * axis))


def quat_to_matrix(q) -> np.ndarray:
    """Rotation matrix R such that R @ v == quat_rotate(q, v)."""
    w, x, y, z = quat_normalize(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R) -> np.ndarray:
    """Convert a proper rotation matrix to a unit quaternion (w >= 0)."""
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3):
        raise ValueError(f"expected 3x3 matrix, got {R.shape}")
    t = np.trace(R)
    if t > 0:
        s = math.sqrt(t + 1.0) * 2
        q = np.array(
            [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
        )
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
        q = np.array(
            [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
        )
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
        q = np.array(
            [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
        )
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
        q = np.array(
            [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
        )
    if q[0] < 0:
        q = -q
    return quat_normalize(q)


def quat_rotate(q, v) -> np.ndarray:
    """Rotate vector(s) v by quaternion q. Accepts shape (3,) or (N, 3)."""
    v = np.asarray(v, dtype=np.float64)
    R = quat_to_matrix(q)
    if v.ndim == 1:
        return R @ v
    return v @ R.T


def angular_distance(q1, q2) -> float:
    """Angle in degrees between two rotations: 2*arccos(|q1 . q2|), range [0, 180].

    The absolute value quotients out the quaternion double cover, so the result
    is invariant under sign flips of either argument.
    """
    d = abs(float(np.dot(quat_normalize(q1), quat_normalize(q2))))
    return math.degrees(2.0 * math.acos(min(d, 1.0)))


def look_at_rotation(eye, target, up=(0.0, 1.0, 0.0)) -> np.ndarray:
    """Rotation whose local +Z axis points from eye toward target.

    If ``up`` is (near-)parallel to the viewing direction, falls back to +Z and
    then +Y as alternate up axes so the result is always defined.
    """
    eye = as_vec3(eye)
    target = as_vec3(target)
    forward = target - eye
    n = float(np.linalg.norm(forward))
    if n < 1e-12:
        raise ValueError("eye and target coincide")
    forward /= n

    candidates = [as_vec3(up), *_FALLBACK_UPS]
    for cand in candidates:
        right = np.cross(cand, forward)
        rn = float(np.linalg.norm(right))
        if rn > 1e-9:
            right /= rn
            true_up = np.cross(forward, right)
            return matrix_to_quat(np.column_stack([right, true_up, forward]))
    raise ValueError("no valid up axis found")  # unreachable: fallbacks are orthogonal


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform (unit quaternion + translation) mapping frame b to frame a."""

    rotation: np.ndarray  # quaternion [w, x, y, z]
    translation: np.ndarray  # [x, y, z] meters

    def __eq__(self, other):
        return (
            isinstance(other, Pose)
            and np.array_equal(self.rotation, other.rotation)
            and np.array_equal(self.translation, other.translation)
        )

    def __post_init__(self):
        q = np.asarray(self.rotation, dtype=np.float64).reshape(4)
        t = as_vec3(self.translation)
        n = float(np.linalg.norm(q))
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"rotation quaternion norm {n} deviates from 1")
        q = q / n
        q.flags.writeable = False
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.array([1.0, 0.0, 0.0, 0.0]), np.zeros(3))

    def compose(self, other: "Pose") -> "Pose":
        """(a_from_b).compose(b_from_c) -> a_from_c."""
        return Pose(
            quat_multiply(self.rotation, other.rotation),
            quat_rotate(self.rotation, other.translation) + self.translation,
        )

    def inverse(self) -> "Pose":
        q_inv = quat_conjugate(self.rotation)
        return Pose(q_inv, -quat_rotate(q_inv, self.translation))

    def transform(self, points) -> np.ndarray:
        """Apply the transform to one (3,) point or a stack (N, 3) of points."""
        return quat_rotate(self.rotation, points) + self.translation

    def to_dict(self) -> dict:
        return {
            "rotation": [float(c) for c in self.rotation],
            "translation": [float(c) for c in self.translation],
        }

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(np.asarray(d["rotation"], dtype=np.float64),
                    np.asarray(d["translation"], dtype=np.float64))


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics; fx, fy, cx, cy in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive: fx={self.fx} fy={self.fy}")
        if not (isinstance(self.width, int) and isinstance(self.height, int)
                and self.width > 0 and self.height > 0):
            raise ValueError(f"image size must be positive integers: {self.width}x{self.height}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(f"principal point ({self.cx}, {self.cy}) outside image")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def image_center(self) -> tuple:
        return (self.cx, self.cy)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def to_dict(self) -> dict:
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height,
        }

    @staticmethod
    def from_dict(d: dict) -> "CameraIntrinsics":
        return CameraIntrinsics(
            fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]), cy=float(d["cy"]),
            width=int(d["width"]), height=int(d["height"]),
        )


def project_point(K: CameraIntrinsics, cam_from_world: Pose, p_world) -> tuple:
    """Project a world point through the pinhole model; returns pixel (u, v).

    The result may lie outside the image bounds. Raises BehindCameraError when
    the camera-frame depth is below MIN_CAMERA_DEPTH.
    """
    p = cam_from_world.transform(as_vec3(p_world))
    if p[2] <= MIN_CAMERA_DEPTH:
        raise BehindCameraError(f"point depth {p[2]:.3g} m is at or behind the camera")
    return (K.fx * p[0] / p[2] + K.cx, K.fy * p[1] / p[2] + K.cy)


def project_points(K: CameraIntrinsics, cam_from_world: Pose, pts) -> tuple:
    """Vectorized projection of an (N, 3) stack.

    Returns ``(pixels, in_front)`` where pixels is (N, 2) and ``in_front`` marks
    rows with valid depth; pixel rows for points behind the camera are NaN.
    """
    p = cam_from_world.transform(np.asarray(pts, dtype=np.float64))
    z = p[:, 2]
    in_front = z > MIN_CAMERA_DEPTH
    with np.errstate(divide="ignore", invalid="ignore"):
        u = K.fx * p[:, 0] / z + K.cx
        v = K.fy * p[:, 1] / z + K.cy
    pix = np.column_stack([u, v])
    pix[~in_front] = np.nan
    return pix, in_front
