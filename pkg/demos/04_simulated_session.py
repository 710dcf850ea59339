"""A complete simulated capture session.

Drives the full engine (countdown, frame intake, hit testing, annotation,
persistence, ranking) with the scripted ideal trajectory, then reads the
dataset back and prints the variability report the way the CLI does.
"""

import tempfile

from hemicap import (
    SessionStore,
    build_hemisphere_layout,
    ranking,
    run_simulated_session,
    scripted_trajectory,
    variability_report,
)
from hemicap.cli import simulate_config
from hemicap.geometry import Pose
from hemicap.metrics import variability_table
from hemicap.session import FrameRecord

store_root = tempfile.mkdtemp(prefix="hemicap-demo-")
config = simulate_config(n=50)
layout = build_hemisphere_layout(config.target_count, config.display_radius)
trajectory = scripted_trajectory(layout, standoff_factor=1.75)

milestones = []
run_simulated_session(
    config, trajectory, store_root,
    on_result=lambda r: milestones.append(r) if r.rate_percent % 20 == 0 else None,
)
for result in milestones:
    print(f"rate {result.rate_percent:5.1f}%  elapsed {result.elapsed_s:5.2f} s  "
          f"patch {result.hit_index}")

store = SessionStore(store_root)
manifest = store.list_finished()[0]
print(f"\nsession {manifest['session_id']} finished in "
      f"{manifest['capture_time_s']} s with {len(manifest['frames'])} frames")

frames = [FrameRecord.from_dict(f) for f in manifest["frames"]]
marker_q = Pose.from_dict(manifest["layout"]["layout_from_marker"]).rotation
report = variability_report(frames, marker_q)
print()
print(variability_table({"simulated": [report]}))

print("ranking:")
for entry in ranking(store):
    print(f"  #{entry.rank}  {entry.mode:6s} {entry.performance:.3f} s/image  "
          f"{entry.capture_time:.1f} s  {entry.image_count} images")

print(f"\ndataset on disk: {store_root}")
