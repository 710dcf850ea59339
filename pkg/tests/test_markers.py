import math

import numpy as np
import pytest

from hemicap.errors import (
    DegenerateConfigurationError,
    MarkerBehindCameraError,
    WrongMarkerError,
)
from hemicap.geometry import Pose, angular_distance, quat_from_axis_angle, quat_to_matrix
from hemicap.markers import (
    MarkerObservation,
    MarkerSpec,
    estimate_homography,
    estimate_marker_pose,
    marker_corners_3d,
    pose_from_homography,
)
from hemicap.simcam import synth_observation
from sceneutil import DEFAULT_K, corners_in_view, random_camera_pose

CANONICAL_PLANE = np.array([[-1.0, 1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [0.3, 0.7]])

# Monte-Carlo regression geometry: 0.10 m marker seen from 0.7 m at elevations
# >= 30 degrees, fx = fy = 600 on 640x480, sigma = 0.5 px, 1000 seeded draws.
MC_SEED = 2024
MC_MARKER = MarkerSpec(id=7, side_length=0.10)
# First-run measured p95: rotation 2.5436 deg, translation 0.7985 cm.
MC_P95_ROT_BOUND_DEG = 2.60
MC_P95_TRANS_BOUND_M = 0.0085


def _scale_align(h, href):
    h = h / np.linalg.norm(h)
    href = href / np.linalg.norm(href)
    if np.sum(h * href) < 0:
        h = -h
    return h, href


class TestMarkerCorners3d:
    def test_side_010_exact(self):
        corners = marker_corners_3d(MarkerSpec(id=0, side_length=0.10))
        expected = [[-0.05, 0.05, 0], [0.05, 0.05, 0], [0.05, -0.05, 0], [-0.05, -0.05, 0]]
        assert np.array_equal(corners, expected)

    def test_side_004_norms(self):
        corners = marker_corners_3d(MarkerSpec(id=0, side_length=0.04))
        assert np.allclose(np.linalg.norm(corners, axis=1), 0.04 / math.sqrt(2))

    def test_centroid_is_origin(self):
        corners = marker_corners_3d(MarkerSpec(id=0, side_length=0.37))
        assert np.allclose(corners.mean(axis=0), 0.0)

    def test_rejects_nonpositive_side(self):
        with pytest.raises(ValueError):
            MarkerSpec(id=0, side_length=0.0)


class TestMarkerObservation:
    def test_degenerate_quad_rejected(self):
        flat = np.array([[0, 0], [1, 0], [2, 0], [3, 0]], dtype=float)
        with pytest.raises(ValueError):
            MarkerObservation(marker_id=0, corners=flat)

    def test_non_finite_rejected(self):
        corners = np.array([[0, 0], [10, 0], [10, 10], [np.nan, 10]])
        with pytest.raises(ValueError):
            MarkerObservation(marker_id=0, corners=corners)


class TestEstimateHomography:
    def test_recovers_random_homography(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            href = rng.normal(size=(3, 3))
            src = CANONICAL_PLANE
            den = src @ href[2, :2] + href[2, 2]
            if np.any(np.abs(den) < 0.2):
                continue
            dst = np.column_stack(
                [(src @ href[0, :2] + href[0, 2]) / den, (src @ href[1, :2] + href[1, 2]) / den]
            )
            h = estimate_homography(src, dst)
            h, aligned = _scale_align(h, href)
            assert np.max(np.abs(h - aligned)) < 1e-9

    def test_identity_mapping(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        h = estimate_homography(pts, pts)
        h, aligned = _scale_align(h, np.eye(3))
        assert np.max(np.abs(h - aligned)) < 1e-9

    def test_three_collinear_points_degenerate(self):
        src = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
        dst = np.array([[10.0, 10.0], [20.0, 10.0], [30.0, 10.0], [10.0, 30.0]])
        with pytest.raises(DegenerateConfigurationError):
            estimate_homography(src, dst)

    def test_too_few_points(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
        with pytest.raises(ValueError):
            estimate_homography(pts, pts)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(3)
        src = CANONICAL_PLANE
        dst = src * 37.0 + rng.normal(size=src.shape) + 200.0
        h = estimate_homography(src, dst)
        perm = rng.permutation(len(src))
        h_perm = estimate_homography(src[perm], dst[perm])
        h, h_perm = _scale_align(h_perm, h)
        assert np.max(np.abs(h - h_perm)) < 1e-9

    def test_sign_convention(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        h = estimate_homography(pts, pts * 100.0)
        assert h[2, 2] >= 0
        assert abs(np.linalg.norm(h) - 1.0) < 1e-12


def _homography_for_pose(pose: Pose, spec: MarkerSpec):
    obs = synth_observation(pose, DEFAULT_K, spec)
    return estimate_homography(marker_corners_3d(spec)[:, :2], obs.corners)


class TestPoseFromHomography:
    def test_facing_marker_at_one_meter(self):
        spec = MarkerSpec(id=1, side_length=0.10)
        gt = Pose(quat_from_axis_angle((1, 0, 0), math.pi), (0.0, 0.0, 1.0))
        pose = pose_from_homography(_homography_for_pose(gt, spec), DEFAULT_K)
        assert np.allclose(pose.translation, [0, 0, 1], atol=1e-6)
        assert angular_distance(pose.rotation, gt.rotation) < math.degrees(1e-6)

    def test_round_trip_random_poses(self):
        spec = MarkerSpec(id=1, side_length=0.05)
        corners3d = marker_corners_3d(spec)
        rng = np.random.default_rng(77)
        checked = 0
        while checked < 300:
            gt = random_camera_pose(rng, (0.3, 1.5), min_elevation_deg=15.0,
                                    target_jitter=0.03)
            if not corners_in_view(DEFAULT_K, gt, corners3d):
                continue
            pose = pose_from_homography(_homography_for_pose(gt, spec), DEFAULT_K)
            assert angular_distance(pose.rotation, gt.rotation) < 0.5
            dist = np.linalg.norm(gt.translation)
            assert np.linalg.norm(pose.translation - gt.translation) < 0.01 * dist
            checked += 1

    def test_rotation_always_proper(self):
        # Even a sheared, non-metric homography must yield det(R) = +1.
        rng = np.random.default_rng(5)
        for _ in range(50):
            h = rng.normal(size=(3, 3))
            if abs(h[2, 2]) < 0.1:
                continue
            h = h if h[2, 2] > 0 else -h
            h = h / np.linalg.norm(h)
            try:
                pose = pose_from_homography(h, DEFAULT_K)
            except MarkerBehindCameraError:
                continue
            assert np.linalg.det(quat_to_matrix(pose.rotation)) == pytest.approx(1.0, abs=1e-9)
            assert abs(np.linalg.norm(pose.rotation) - 1.0) < 1e-9

    def test_negative_depth_rejected(self):
        spec = MarkerSpec(id=1, side_length=0.10)
        gt = Pose(quat_from_axis_angle((1, 0, 0), math.pi), (0.0, 0.0, 1.0))
        h = _homography_for_pose(gt, spec)
        with pytest.raises(MarkerBehindCameraError):
            pose_from_homography(-h, DEFAULT_K)


class TestEstimateMarkerPose:
    def test_noise_free_round_trip(self):
        spec = MarkerSpec(id=9, side_length=0.05)
        corners3d = marker_corners_3d(spec)
        rng = np.random.default_rng(123)
        checked = 0
        while checked < 200:
            gt = random_camera_pose(rng, (0.3, 1.5), min_elevation_deg=15.0,
                                    target_jitter=0.03)
            if not corners_in_view(DEFAULT_K, gt, corners3d):
                continue
            obs = synth_observation(gt, DEFAULT_K, spec)
            pose = estimate_marker_pose(obs, DEFAULT_K, spec)
            assert angular_distance(pose.rotation, gt.rotation) < 0.5
            dist = np.linalg.norm(gt.translation)
            assert np.linalg.norm(pose.translation - gt.translation) < 0.01 * dist
            checked += 1

    def test_id_mismatch(self):
        spec = MarkerSpec(id=9, side_length=0.05)
        obs = MarkerObservation(
            marker_id=8, corners=np.array([[0, 0], [40, 0], [40, 40], [0, 40]], dtype=float)
        )
        with pytest.raises(WrongMarkerError):
            estimate_marker_pose(obs, DEFAULT_K, spec)

    def test_noise_monte_carlo_regression(self):
        corners3d = marker_corners_3d(MC_MARKER)
        rng = np.random.default_rng(MC_SEED)
        rot_errs, trans_errs = [], []
        while len(rot_errs) < 1000:
            gt = random_camera_pose(rng, (0.7, 0.7), min_elevation_deg=30.0)
            if not corners_in_view(DEFAULT_K, gt, corners3d):
                continue
            obs = synth_observation(gt, DEFAULT_K, MC_MARKER, noise_px=0.5, rng=rng)
            pose = estimate_marker_pose(obs, DEFAULT_K, MC_MARKER)
            rot_errs.append(angular_distance(pose.rotation, gt.rotation))
            trans_errs.append(float(np.linalg.norm(pose.translation - gt.translation)))
        p95_rot = float(np.percentile(rot_errs, 95))
        p95_trans = float(np.percentile(trans_errs, 95))
        assert p95_rot < MC_P95_ROT_BOUND_DEG
        assert p95_trans < MC_P95_TRANS_BOUND_M
