"""Efficiency and variability measures over collected datasets.

``variability_report`` summarizes one session's camera poses: distance from
the object, bounding volume of the viewpoint positions, and angular distance
between the camera posture and the marker posture. ``id_rate`` is the
increase-decrease rate across a participant's repeated trials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import angular_distance


@dataclass(frozen=True)
class VariabilityReport:
    distance_mean: float  # meters
    distance_std: float
    volume: float  # cubic meters
    angular_mean: float  # degrees
    angular_std: float
    n_frames: int

    def to_dict(self) -> dict:
        return {
            "distance_mean": self.distance_mean,
            "distance_std": self.distance_std,
            "volume": self.volume,
            "angular_mean": self.angular_mean,
            "angular_std": self.angular_std,
            "n_frames": self.n_frames,
        }


def id_rate(trial_times) -> float:
    """Increase-decrease rate across ordered trials: (t_last - t_first) / t_first.

    Negative indicates familiarity (the final trial was faster), positive
    indicates fatigue.
    """
    times = [float(t) for t in trial_times]
    if len(times) < 2:
        raise ValueError(f"need at least 2 trials, got {len(times)}")
    if any(t <= 0 for t in times):
        raise ValueError("trial times must be positive")
    return (times[-1] - times[0]) / times[0]


def _sample_std(values: np.ndarray) -> float:
    if values.shape[0] < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def variability_report(frames, marker_orientation) -> VariabilityReport:
    """Variability measures over a session's frames.

    Each frame must carry a ``cam_from_layout`` pose. Camera positions and
    postures are taken in the layout frame (object at the origin): distance is
    the norm of the camera position, the volume is the axis-aligned bounding
    box of all positions, and the angular distance compares each camera posture
    against ``marker_orientation``.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("need at least 1 frame")
    layout_from_cam = [f.cam_from_layout.inverse() for f in frames]
    positions = np.array([p.translation for p in layout_from_cam])
    distances = np.linalg.norm(positions, axis=1)
    extents = positions.max(axis=0) - positions.min(axis=0)
    angles = np.array(
        [angular_distance(p.rotation, marker_orientation) for p in layout_from_cam]
    )
    return VariabilityReport(
        distance_mean=float(distances.mean()),
        distance_std=_sample_std(distances),
        volume=float(np.prod(extents)),
        angular_mean=float(angles.mean()),
        angular_std=_sample_std(angles),
        n_frames=len(frames),
    )


def _fmt_mean_std(mean: float, std: float) -> str:
    return f"{mean:.3g} ± {std:.3g}"


def variability_table(reports_by_row: dict) -> str:
    """Fixed-width text table of variability reports.

    ``reports_by_row`` maps a row label (e.g. a collection mode) to the
    per-trial reports in trial order. Sections: distance, volume, angular
    distance, mirroring how multi-trial results are conventionally tabulated.
    """
    n_trials = max((len(v) for v in reports_by_row.values()), default=0)
    label_w = max([len(k) for k in reports_by_row] + [len("Method")]) + 2
    col_w = 16

    def row(label, cells):
        padded = [f"{c:>{col_w}}" for c in cells]
        return f"{label:<{label_w}}" + "".join(padded)

    header_cells = [_ordinal(i + 1) for i in range(n_trials)]
    lines = []
    sections = [
        ("Distance for each trial [m]",
         lambda r: _fmt_mean_std(r.distance_mean, r.distance_std)),
        ("Volume [m^3]", lambda r: f"{r.volume:.3g}"),
        ("Angular distance for each trial [deg]",
         lambda r: _fmt_mean_std(r.angular_mean, r.angular_std)),
    ]
    for title, fmt in sections:
        lines.append(title)
        lines.append(row("Method", header_cells))
        for label, reports in reports_by_row.items():
            cells = [fmt(r) for r in reports] + [""] * (n_trials - len(reports))
            lines.append(row(label, cells))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def id_rate_table(times_by_row: dict) -> str:
    """Fixed-width table of per-trial collection times and the ID rate."""
    n_trials = max((len(v) for v in times_by_row.values()), default=0)
    label_w = max([len(k) for k in times_by_row] + [len("Method")]) + 2
    col_w = 12

    def row(label, cells):
        return f"{label:<{label_w}}" + "".join(f"{c:>{col_w}}" for c in cells)

    lines = ["Collection time for each trial [s]"]
    lines.append(row("Method", [_ordinal(i + 1) for i in range(n_trials)] + ["ID rate"]))
    for label, times in times_by_row.items():
        cells = [f"{t:.4g}" for t in times] + [""] * (n_trials - len(times))
        cells.append(f"{id_rate(times):.4g}" if len(times) >= 2 else "n/a")
        lines.append(row(label, cells))
    return "\n".join(lines) + "\n"


def _ordinal(i: int) -> str:
    suffix = {1: "st", 2: "nd", 3: "rd"}.get(i if i < 20 else i % 10, "th")
    return f"{i}{suffix}"
