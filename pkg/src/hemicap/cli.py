"""Operator entry points: serve, simulate, report, layout."""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import tempfile
from pathlib import Path

from .annotate import ObjectModel, box_corners
from .coverage import HitThresholds, build_hemisphere_layout
from .datastore import SessionStore, list_finished
from .errors import HemicapError
from .geometry import CameraIntrinsics, Pose
from .markers import MarkerSpec
from .metrics import id_rate_table, variability_report, variability_table
from .session import FrameRecord, ModeFlags, SessionConfig, MODE_NAMES
from . import simcam
from .service import DEFAULT_STORE_ROOT, STORE_ROOT_ENV


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors on exit code 1 (runtime failures use 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hemicap",
        description="Marker-based auto-annotation capture engine with hemisphere "
                    "viewpoint coverage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=8000, help="listen port")
    p_serve.add_argument("--host", default="127.0.0.1", help="bind address")
    p_serve.add_argument(
        "--store-root",
        default=os.environ.get(STORE_ROOT_ENV, DEFAULT_STORE_ROOT),
        help=f"dataset store directory (or ${STORE_ROOT_ENV})",
    )
    p_serve.set_defaults(func=cmd_serve)

    p_sim = sub.add_parser("simulate", help="run a simulated capture session end to end")
    p_sim.add_argument("--mode", choices=MODE_NAMES, default="full",
                       help="display mode under test")
    p_sim.add_argument("--n", type=int, default=100, help="target image / patch count")
    p_sim.add_argument("--noise-px", type=float, default=0.0,
                       help="Gaussian corner noise sigma in pixels")
    p_sim.add_argument("--seed", type=int, default=0, help="RNG seed")
    p_sim.add_argument("--store-root", default=None,
                       help="dataset store directory (default: a temp directory)")
    p_sim.add_argument("--radius", type=float, default=0.4, help="hemisphere radius [m]")
    p_sim.add_argument("--standoff", type=float, default=1.75,
                       help="camera distance as a multiple of the radius")
    p_sim.add_argument("--marker-size", type=float, default=0.05, help="marker side [m]")
    p_sim.add_argument("--center-px-radius", type=float, default=None,
                       help="override the center-hit pixel radius")
    p_sim.add_argument("--max-passes", type=int, default=50,
                       help="trajectory repetitions before giving up (noisy runs)")
    p_sim.add_argument("--trajectory", default=None,
                       help="camera trajectory JSON (list of {rotation, translation} "
                            "poses in the layout frame); default: the scripted "
                            "one-pose-per-patch sweep")
    p_sim.add_argument("--trajectory-out", default=None,
                       help="write the trajectory that was used as JSON")
    p_sim.add_argument("--replay-out", default=None,
                       help="also write the observation stream as a replay JSON file")
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("report", help="variability and ID-rate reports over a store")
    p_rep.add_argument("--store-root", required=True, help="dataset store directory")
    p_rep.add_argument("--session", default=None, help="report a single session as JSON")
    p_rep.set_defaults(func=cmd_report)

    p_lay = sub.add_parser("layout", help="dump a hemisphere patch layout as JSON")
    p_lay.add_argument("--n", type=int, required=True, help="patch count (>= 2)")
    p_lay.add_argument("--radius", type=float, required=True, help="hemisphere radius [m]")
    p_lay.add_argument("--out", required=True, help="output JSON path ('-' for stdout)")
    p_lay.set_defaults(func=cmd_layout)

    return parser


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .session import SessionEngine

    engine = SessionEngine(SessionStore(args.store_root))
    app = create_app(engine)
    print(f"store root: {args.store_root}", file=sys.stderr)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def simulate_config(mode: str = "full", n: int = 100, marker_size: float = 0.05,
                    radius: float = 0.4, center_px_radius=None) -> SessionConfig:
    """Desk-scale defaults for simulated sessions."""
    intrinsics = CameraIntrinsics(fx=600.0, fy=600.0, cx=320.0, cy=240.0,
                                  width=640, height=480)
    thresholds = HitThresholds.defaults(intrinsics)
    if center_px_radius is not None:
        thresholds = HitThresholds(
            center_px_radius=center_px_radius,
            min_distance=thresholds.min_distance,
            max_distance=thresholds.max_distance,
        )
    return SessionConfig(
        target_count=n,
        marker_size=marker_size,
        display_radius=radius,
        mode=ModeFlags.from_name(mode),
        thresholds=thresholds,
        intrinsics=intrinsics,
        marker_spec=MarkerSpec(id=7, side_length=marker_size),
        object_model=ObjectModel(
            class_id=1,
            class_name="target",
            object_from_marker=Pose.identity(),
            extent_box=box_corners((0.12, 0.12, 0.12)),
        ),
        synthetic_images=True,
    )


def cmd_simulate(args) -> int:
    config = simulate_config(
        mode=args.mode, n=args.n, marker_size=args.marker_size,
        radius=args.radius, center_px_radius=args.center_px_radius,
    )
    store_root = args.store_root or tempfile.mkdtemp(prefix="hemicap-sim-")
    if args.trajectory:
        base = simcam.trajectory_from_dicts(
            json.loads(Path(args.trajectory).read_text())
        )
    else:
        layout = build_hemisphere_layout(args.n, args.radius)
        base = simcam.scripted_trajectory(layout, args.standoff)
    trajectory = itertools.islice(itertools.cycle(base), len(base) * args.max_passes)

    counter = itertools.count(1)

    def show(result):
        i = next(counter)
        line = (f"frame {i:04d}  {result.status:<12} "
                f"rate={result.rate_percent:6.1f}%  elapsed={result.elapsed_s:8.2f}s")
        if result.hit_index is not None:
            line += f"  patch={result.hit_index:4d}"
        print(line)

    session_id = simcam.run_simulated_session(
        config, trajectory, store_root,
        noise_px=args.noise_px, seed=args.seed, on_result=show,
    )
    store = SessionStore(store_root)
    manifest = store.load_manifest(session_id)
    print(f"finished: {manifest['frames'].__len__()} frames, "
          f"capture_time_s={manifest['capture_time_s']:.3f}")
    print(f"session {session_id} stored under {store_root}", file=sys.stderr)

    if args.trajectory_out:
        dicts = simcam.trajectory_to_dicts(base)
        Path(args.trajectory_out).write_text(json.dumps(dicts, indent=2) + "\n")
        print(f"trajectory written to {args.trajectory_out}", file=sys.stderr)
    if args.replay_out:
        entries = simcam.record_replay(config, base, noise_px=args.noise_px, seed=args.seed)
        Path(args.replay_out).write_text(json.dumps(entries, indent=2) + "\n")
        print(f"replay written to {args.replay_out}", file=sys.stderr)
    return 0


def _session_reports(manifests) -> dict:
    """Per-mode lists of (session_id, capture_time, report) in session-id order."""
    by_mode = {}
    for manifest in manifests:
        mode = ModeFlags.from_dict(manifest["config"]["mode"]).name
        frames = [FrameRecord.from_dict(f) for f in manifest["frames"]]
        marker_orientation = Pose.from_dict(
            manifest["layout"]["layout_from_marker"]
        ).rotation
        report = variability_report(frames, marker_orientation)
        by_mode.setdefault(mode, []).append(
            (manifest["session_id"], manifest["capture_time_s"], report)
        )
    return by_mode


def cmd_report(args) -> int:
    store_root = Path(args.store_root)
    if args.session:
        manifest = SessionStore(store_root).load_manifest(args.session)
        frames = [FrameRecord.from_dict(f) for f in manifest["frames"]]
        marker_orientation = Pose.from_dict(
            manifest["layout"]["layout_from_marker"]
        ).rotation
        report = variability_report(frames, marker_orientation)
        print(json.dumps({"session_id": args.session, **report.to_dict()}, indent=2))
        return 0

    manifests = list_finished(store_root)
    if not manifests:
        print("no sessions")
        return 0
    by_mode = _session_reports(manifests)
    print(variability_table(
        {mode: [r for _, _, r in rows] for mode, rows in by_mode.items()}
    ))
    print(id_rate_table(
        {mode: [t for _, t, _ in rows] for mode, rows in by_mode.items()}
    ))
    return 0


def cmd_layout(args) -> int:
    layout = build_hemisphere_layout(args.n, args.radius)
    text = json.dumps(layout.to_dict(), indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"layout written to {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HemicapError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
