"""Acceptance suite: one test per top-level criterion, at its stated tolerance.

Each test prints a single [PASS] line with the measured quantities when it
succeeds (run with ``pytest tests/test_acceptance.py -v -s`` to see them).
Regression constants (layout separations, noise percentiles) were frozen from
the first run of the independent oracles in this file.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from hemicap.annotate import ObjectModel, annotate_bbox, box_corners
from hemicap.coverage import build_hemisphere_layout
from hemicap.datastore import SessionStore
from hemicap.errors import NotVisibleError
from hemicap.geometry import Pose, angular_distance
from hemicap.markers import MarkerSpec, estimate_marker_pose, marker_corners_3d
from hemicap.metrics import id_rate, variability_report
from hemicap.session import SessionEngine, ranking
from hemicap.simcam import (
    ManualClock,
    PLACEHOLDER_PNG,
    observation_for_pose,
    run_simulated_session,
    scripted_trajectory,
    synth_observation,
)
from hemicap.cli import simulate_config
from sceneutil import (
    DEFAULT_K,
    bbox_oracle,
    compare_trees,
    corners_in_view,
    int_bbox,
    random_camera_pose,
)

# Frozen at first run: brute-force minimum pairwise separations (radius 1).
FROZEN_MIN_SEP = {25: 0.4096894644, 100: 0.2026010114, 400: 0.1011016564}

# Frozen at first run of the seeded Monte-Carlo below (0.10 m marker, 0.7 m
# standoff, elevation >= 30 deg, sigma = 0.5 px, 1000 draws, seed 2024):
# p95 rotation 2.5436 deg, p95 translation 0.7985 cm.
FROZEN_P95_ROT_DEG = 2.60
FROZEN_P95_TRANS_M = 0.0085


def ok(name: str, detail: str = ""):
    print(f"[PASS] {name}" + (f": {detail}" if detail else ""))


def test_pose_round_trip_noise_free():
    """1000 random poses, 0.3-1.5 m, marker in view, sigma=0: rot < 0.5 deg,
    trans < 1% of distance, all cases, under 5 s."""
    spec = MarkerSpec(id=7, side_length=0.05)
    corners3d = marker_corners_3d(spec)
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst_rot = 0.0
    worst_trans_frac = 0.0
    checked = 0
    while checked < 1000:
        gt = random_camera_pose(rng, (0.3, 1.5), min_elevation_deg=15.0,
                                target_jitter=0.03)
        if not corners_in_view(DEFAULT_K, gt, corners3d):
            continue
        obs = synth_observation(gt, DEFAULT_K, spec)
        est = estimate_marker_pose(obs, DEFAULT_K, spec)
        rot_err = angular_distance(est.rotation, gt.rotation)
        trans_frac = (np.linalg.norm(est.translation - gt.translation)
                      / np.linalg.norm(gt.translation))
        assert rot_err < 0.5, f"rotation error {rot_err} deg at case {checked}"
        assert trans_frac < 0.01, f"translation error {trans_frac:.2%} at case {checked}"
        worst_rot = max(worst_rot, rot_err)
        worst_trans_frac = max(worst_trans_frac, trans_frac)
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"round trip took {elapsed:.2f} s"
    ok("pose round trip",
       f"1000/1000 poses, worst rot {worst_rot:.2e} deg, "
       f"worst trans {worst_trans_frac:.2e} of distance, {elapsed:.2f} s")


def test_annotation_matches_brute_force_oracle():
    """500 random synthetic scenes: integer-clipped bounds identical to the
    independent corner-projection oracle."""
    rng = np.random.default_rng(99)
    model = ObjectModel(
        class_id=1, class_name="target", object_from_marker=Pose.identity(),
        extent_box=box_corners((0.15, 0.1, 0.2)),
    )
    checked = 0
    agreements = 0
    while checked < 500:
        cam_from_object = random_camera_pose(rng, (0.35, 1.4), min_elevation_deg=5.0,
                                             target_jitter=0.25)
        oracle = bbox_oracle(DEFAULT_K, cam_from_object, model.extent_box)
        try:
            record = annotate_bbox(DEFAULT_K, cam_from_object, model)
        except NotVisibleError:
            assert oracle is None
            continue
        assert oracle is not None
        assert int_bbox(record.bbox) == int_bbox(oracle)
        agreements += 1
        checked += 1
    ok("annotation oracle", f"{agreements}/500 scenes identical after integer clipping")


def test_layout_properties():
    """n in {25, 100, 400}: centers on the hemisphere, min separation within
    10% of the frozen brute-force value, deterministic construction."""
    for n, frozen in FROZEN_MIN_SEP.items():
        layout = build_hemisphere_layout(n, 1.0)
        norms = np.linalg.norm(layout.centers, axis=1)
        assert np.all(np.abs(norms - 1.0) <= 1e-9)
        assert np.all(layout.centers[:, 1] >= 0)

        dirs = layout.centers
        best = math.pi
        for i in range(n):  # independent O(n^2) oracle
            for j in range(i + 1, n):
                d = max(min(float(dirs[i] @ dirs[j]), 1.0), -1.0)
                best = min(best, math.acos(d))
        assert abs(best - frozen) <= 0.10 * frozen, f"n={n}: {best} vs frozen {frozen}"

        again = build_hemisphere_layout(n, 1.0)
        assert np.array_equal(layout.centers, again.centers)
        assert np.array_equal(layout.orientations, again.orientations)
    ok("layout properties",
       "n=25/100/400 on hemisphere, separations within 10% of frozen, deterministic")


def test_end_to_end_session(tmp_path):
    """Scripted trajectory, sigma=0, n=100: finishes in exactly 100 submissions
    with rate trace 1..100%; two seeded runs persist identical bytes."""
    rate_traces = {}
    for run in ("a", "b"):
        config = simulate_config(n=100)
        layout = build_hemisphere_layout(100, config.display_radius)
        trajectory = scripted_trajectory(layout, 1.75)
        rates = []
        run_simulated_session(
            config, trajectory, tmp_path / run, noise_px=0.0, seed=7,
            on_result=lambda r: rates.append(r.rate_percent),
        )
        assert len(rates) == 100
        assert rates == [pytest.approx(float(i)) for i in range(1, 101)]
        rate_traces[run] = rates
    mismatches = compare_trees(tmp_path / "a", tmp_path / "b")
    assert mismatches == [], f"differing files: {mismatches}"
    ok("end-to-end session",
       "100 submissions, rate trace 1..100%, two seeded runs byte-identical")


def test_ablation_neutrality(tmp_path):
    """The same replayed frame stream under all four modes: byte-identical
    datasets and capture times; only display flags differ in status."""
    n = 10
    layout = build_hemisphere_layout(n, 0.4)
    poses = scripted_trajectory(layout, 1.75)
    statuses = {}
    capture_times = {}
    roots = {}
    for mode in ("full", "no-hm", "no-cr", "no-et"):
        config = simulate_config(n=n, marker_size=0.1, mode=mode)
        clock = ManualClock()
        engine = SessionEngine(SessionStore(tmp_path / mode), clock=clock)
        session_id = engine.start_session(config)
        clock.advance(5.0)
        for k, pose in enumerate(poses):
            ts = 100 * (k + 1)
            obs = observation_for_pose(pose, config, timestamp_ms=ts)
            engine.submit_frame(session_id, PLACEHOLDER_PNG, [obs], ts)
        statuses[mode] = engine.session_status(session_id)
        capture_times[mode] = engine.store.load_manifest(session_id)["capture_time_s"]
        roots[mode] = tmp_path / mode

    assert len(set(capture_times.values())) == 1

    # Datasets must agree byte for byte; the stored config and the ranking
    # entry necessarily record their own mode label, so those single fields are
    # rewritten to a fixed value before comparing bytes.
    def normalized_tree(root: Path) -> dict:
        out = {}
        for path in sorted(root.rglob("*")):
            if not path.is_file():
                continue
            data = path.read_bytes()
            if path.name == "manifest.json":
                doc = json.loads(data)
                doc["config"]["mode"] = "normalized"
                data = json.dumps(doc, indent=2).encode()
            elif path.name == "ranking.json":
                doc = json.loads(data)
                for entry in doc:
                    entry["mode"] = "normalized"
                data = json.dumps(doc, indent=2).encode()
            out[str(path.relative_to(root))] = data
        return out

    reference = normalized_tree(roots["full"])
    for mode in ("no-hm", "no-cr", "no-et"):
        tree = normalized_tree(roots[mode])
        assert tree.keys() == reference.keys()
        for rel, data in reference.items():
            assert tree[rel] == data, f"{mode}: {rel} differs"

    flags = {m: (s["show_hemisphere"], s["show_rate"], s["show_elapsed"])
             for m, s in statuses.items()}
    assert flags == {
        "full": (True, True, True),
        "no-hm": (False, True, True),
        "no-cr": (True, False, True),
        "no-et": (True, True, False),
    }
    for key in ("rate_percent", "elapsed_s", "phase", "target_count"):
        assert len({json.dumps(s[key]) for s in statuses.values()}) == 1
    ok("ablation neutrality",
       f"4 modes, byte-identical datasets, capture_time {capture_times['full']} s")


def test_metrics_formulas():
    """id_rate endpoints, exact cube volume, double-cover angular distance, and
    the synthetic sphere dataset recovery."""
    rate = id_rate([159, 176, 213])
    assert rate == pytest.approx(0.3396, abs=1e-4)

    import types

    def frame_at(position, rotation=(1.0, 0.0, 0.0, 0.0)):
        return types.SimpleNamespace(
            cam_from_layout=Pose(np.asarray(rotation), position).inverse()
        )

    cube_frames = [frame_at((x, y, z))
                   for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)]
    identity = np.array([1.0, 0.0, 0.0, 0.0])
    assert variability_report(cube_frames, identity).volume == 1.0

    q = np.array([0.3, 0.5, 0.4, 0.2])
    q /= np.linalg.norm(q)
    assert angular_distance(q, -q) == 0.0

    rng = np.random.default_rng(5)
    n = 1000
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = 0.678 + rng.normal(0.0, 0.133, size=n)
    report = variability_report([frame_at(r * d) for r, d in zip(radii, dirs)], identity)
    bound = 3 * 0.133 / math.sqrt(n)
    assert abs(report.distance_mean - 0.678) < bound
    assert abs(report.distance_std - 0.133) < bound
    ok("metrics formulas",
       f"id_rate {rate:.4f}, cube volume 1.0, q/-q distance 0, sphere dataset "
       f"{report.distance_mean:.3f} +/- {report.distance_std:.3f} (target 0.678 +/- 0.133)")


def test_ranking_order_and_performance(tmp_path):
    """Capture times [159, 176, 213] s at 100 images: performances
    [1.59, 1.76, 2.13] s/image and ranks [1, 2, 3]."""
    store = SessionStore(tmp_path / "store")
    for sid, t in (("s-early", 176.0), ("s-mid", 159.0), ("s-late", 213.0)):
        store.append_ranking_entry(
            {"session_id": sid, "mode": "full", "capture_time_s": t, "image_count": 100}
        )
    entries = ranking(store)
    assert [e.rank for e in entries] == [1, 2, 3]
    assert [e.capture_time for e in entries] == [159.0, 176.0, 213.0]
    assert [e.performance for e in entries] == [
        pytest.approx(1.59), pytest.approx(1.76), pytest.approx(2.13)]
    ok("ranking", "times [159, 176, 213] -> performances [1.59, 1.76, 2.13], ranks [1, 2, 3]")


def test_noise_robustness_regression():
    """sigma = 0.5 px at 0.7 m standoff: 95th-percentile rotation error < 3 deg
    and translation error < 3 cm over 1000 seeded draws; also within the bounds
    frozen from the first Monte-Carlo run."""
    spec = MarkerSpec(id=7, side_length=0.10)
    corners3d = marker_corners_3d(spec)
    rng = np.random.default_rng(2024)
    rot_errs = []
    trans_errs = []
    while len(rot_errs) < 1000:
        gt = random_camera_pose(rng, (0.7, 0.7), min_elevation_deg=30.0)
        if not corners_in_view(DEFAULT_K, gt, corners3d):
            continue
        obs = synth_observation(gt, DEFAULT_K, spec, noise_px=0.5, rng=rng)
        est = estimate_marker_pose(obs, DEFAULT_K, spec)
        rot_errs.append(angular_distance(est.rotation, gt.rotation))
        trans_errs.append(float(np.linalg.norm(est.translation - gt.translation)))
    p95_rot = float(np.percentile(rot_errs, 95))
    p95_trans = float(np.percentile(trans_errs, 95))
    assert p95_rot < 3.0, f"p95 rotation error {p95_rot:.3f} deg"
    assert p95_trans < 0.03, f"p95 translation error {p95_trans * 100:.3f} cm"
    assert p95_rot <= FROZEN_P95_ROT_DEG
    assert p95_trans <= FROZEN_P95_TRANS_M
    ok("noise robustness",
       f"p95 rotation {p95_rot:.3f} deg (< 3), p95 translation "
       f"{p95_trans * 100:.3f} cm (< 3)")
