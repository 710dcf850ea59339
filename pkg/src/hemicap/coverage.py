"""Hemisphere patch layout, center-hit testing, and collection-rate accounting.

Patches are laid out along a generalized spiral on the upper (y > 0) hemisphere
so that rectangles of equal angular size do not overlap. The construction is
the full-sphere equal-area spiral restricted to heights h in (0, 1), with the
azimuth step of a 2n-point full-sphere layout so the surface density matches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlreadyCollectedError
from .geometry import (
    CameraIntrinsics,
    Pose,
    look_at_rotation,
    project_points,
    spherical_to_cartesian,
)

# Fraction of the minimum patch separation used as the rendered rectangle size;
# < 1 guarantees neighboring rectangles never overlap.
_PATCH_FILL = 0.8

DEFAULT_MIN_DISTANCE = 0.3  # meters
DEFAULT_MAX_DISTANCE = 1.5  # meters
DEFAULT_CENTER_RADIUS_FRACTION = 0.05  # of the image diagonal


@dataclass(frozen=True, eq=False)
class PatchLayout:
    """Immutable spiral layout of n patches on a hemisphere of given radius."""

    radius: float
    n_patches: int
    centers: np.ndarray  # (n, 3), layout frame, up = +Y
    orientations: np.ndarray  # (n, 4) quaternions mapping local +Z to the center direction
    patch_half_angle: float  # radians, angular half-size of each rectangle

    def __eq__(self, other):
        return (
            isinstance(other, PatchLayout)
            and self.radius == other.radius
            and self.n_patches == other.n_patches
            and self.patch_half_angle == other.patch_half_angle
            and np.array_equal(self.centers, other.centers)
            and np.array_equal(self.orientations, other.orientations)
        )

    def __post_init__(self):
        for name in ("centers", "orientations"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "n_patches": self.n_patches,
            "patch_half_angle": self.patch_half_angle,
            "centers": [[float(c) for c in row] for row in self.centers],
            "orientations": [[float(c) for c in row] for row in self.orientations],
        }


@dataclass
class CoverageState:
    """Which patches have been collected; entries only flip false -> true."""

    collected: np.ndarray  # (n,) bool
    collected_count: int

    @staticmethod
    def fresh(n: int) -> "CoverageState":
        return CoverageState(collected=np.zeros(n, dtype=bool), collected_count=0)


@dataclass(frozen=True)
class HitThresholds:
    """Empirical gates for accepting a frame as a patch capture."""

    center_px_radius: float
    min_distance: float
    max_distance: float

    def __post_init__(self):
        if not (self.center_px_radius > 0 and self.min_distance > 0 and self.max_distance > 0):
            raise ValueError("thresholds must be positive")
        if not self.min_distance < self.max_distance:
            raise ValueError(
                f"min_distance {self.min_distance} must be below max_distance {self.max_distance}"
            )

    @staticmethod
    def defaults(K: CameraIntrinsics) -> "HitThresholds":
        return HitThresholds(
            center_px_radius=DEFAULT_CENTER_RADIUS_FRACTION * K.diagonal,
            min_distance=DEFAULT_MIN_DISTANCE,
            max_distance=DEFAULT_MAX_DISTANCE,
        )

    def to_dict(self) -> dict:
        return {
            "center_px_radius": self.center_px_radius,
            "min_distance": self.min_distance,
            "max_distance": self.max_distance,
        }

    @staticmethod
    def from_dict(d: dict) -> "HitThresholds":
        return HitThresholds(
            center_px_radius=float(d["center_px_radius"]),
            min_distance=float(d["min_distance"]),
            max_distance=float(d["max_distance"]),
        )


def min_pairwise_separation(directions: np.ndarray, chunk: int = 512) -> float:
    """Smallest angle in radians between any two of the given unit directions."""
    dirs = np.asarray(directions, dtype=np.float64)
    n = dirs.shape[0]
    if n < 2:
        raise ValueError("need at least 2 directions")
    max_dot = -1.0
    for start in range(0, n, chunk):
        block = dirs[start:start + chunk] @ dirs.T
        for i in range(block.shape[0]):
            block[i, start + i] = -1.0  # mask self-pairing
        max_dot = max(max_dot, float(block.max()))
    return math.acos(min(max(max_dot, -1.0), 1.0))


def build_hemisphere_layout(n: int, radius: float) -> PatchLayout:
    """Place n patch centers along a spiral covering the upper hemisphere.

    For k = 1..n: h_k = (k - 0.5)/n, phi_k = arccos(h_k), and the azimuth
    advances by 3.6/sqrt(2n) / sqrt(1 - h_k^2) per step (theta_1 = 0). The
    construction is deterministic: the same (n, radius) yields a bit-identical
    layout.
    """
    if not (isinstance(n, int) and n >= 2):
        raise ValueError(f"n must be an integer >= 2, got {n}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")

    centers = np.zeros((n, 3))
    orientations = np.zeros((n, 4))
    theta = 0.0
    step = 3.6 / math.sqrt(2 * n)
    origin = np.zeros(3)
    for k in range(1, n + 1):
        h = (k - 0.5) / n
        phi = math.acos(h)
        if k > 1:
            theta = (theta + step / math.sqrt(1.0 - h * h)) % (2.0 * math.pi)
        center = spherical_to_cartesian(radius, phi, theta)
        centers[k - 1] = center
        # Patch plane normal faces outward along the center direction.
        orientations[k - 1] = look_at_rotation(origin, center)

    half_angle = _PATCH_FILL * min_pairwise_separation(centers / radius) / 2.0
    return PatchLayout(
        radius=radius,
        n_patches=n,
        centers=centers,
        orientations=orientations,
        patch_half_angle=half_angle,
    )


def hit_test(cam_from_layout: Pose, K: CameraIntrinsics, layout: PatchLayout,
             state: CoverageState, thresholds: HitThresholds):
    """Index of the uncollected patch captured by this camera pose, if any.

    A patch qualifies when its center projects in front of the camera within
    ``center_px_radius`` of the image center, the camera sits in the configured
    distance band from the layout origin, and the patch faces the camera side.
    The qualifying patch closest to the image center wins; ties go to the
    lowest index. Returns None when nothing qualifies.
    """
    cam_pos = cam_from_layout.inverse().translation
    cam_dist = float(np.linalg.norm(cam_pos))
    if not (thresholds.min_distance <= cam_dist <= thresholds.max_distance):
        return None

    pixels, in_front = project_points(K, cam_from_layout, layout.centers)
    offsets = pixels - np.array(K.image_center)
    px_dist = np.hypot(offsets[:, 0], offsets[:, 1])
    facing = layout.centers @ cam_pos > 0.0

    ok = (
        ~state.collected
        & in_front
        & facing
        & (px_dist <= thresholds.center_px_radius)
    )
    if not ok.any():
        return None
    candidates = np.flatnonzero(ok)
    return int(candidates[np.argmin(px_dist[candidates])])


def mark_collected(state: CoverageState, idx: int) -> CoverageState:
    """Flip patch ``idx`` to collected; double-marking raises AlreadyCollectedError."""
    if not 0 <= idx < state.collected.shape[0]:
        raise IndexError(f"patch index {idx} out of range")
    if state.collected[idx]:
        raise AlreadyCollectedError(f"patch {idx} already collected")
    state.collected[idx] = True
    state.collected_count += 1
    return state


def collection_rate(state: CoverageState) -> float:
    """Collected percentage; with n = 100 each hit adds exactly one point."""
    return 100.0 * state.collected_count / state.collected.shape[0]


def patch_payload(layout: PatchLayout, state: CoverageState) -> list:
    """Per-patch status entries for the UI: position, orientation, collected flag."""
    return [
        {
            "index": i,
            "center": [float(c) for c in layout.centers[i]],
            "orientation": [float(c) for c in layout.orientations[i]],
            "half_angle": layout.patch_half_angle,
            "collected": bool(state.collected[i]),
        }
        for i in range(layout.n_patches)
    ]
