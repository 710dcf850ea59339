"""Record UI test fixtures from the real capture service.

Runs two sessions (modes full and no-hm) through the FastAPI app with a
deterministic clock and the scripted ideal trajectory, recording every request
the browser client would make together with the service's actual responses.
The vitest suite replays these transcripts against the UI via a mock fetch.

Usage: python3 frontend/scripts/make_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from hemicap.coverage import build_hemisphere_layout
from hemicap.datastore import SessionStore
from hemicap.service import create_app
from hemicap.session import COUNTDOWN_SECONDS, SessionEngine
from hemicap.simcam import ManualClock, PLACEHOLDER_PNG, record_replay, scripted_trajectory
from hemicap.cli import simulate_config

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
N_PATCHES = 8


def config_payload(mode_name: str) -> dict:
    flags = {
        "show_hemisphere": mode_name != "no-hm",
        "show_rate": mode_name != "no-cr",
        "show_elapsed": mode_name != "no-et",
    }
    return {
        "target_count": N_PATCHES,
        "marker_size": 0.1,
        "display_radius": 0.4,
        "mode": flags,
        "intrinsics": {"fx": 600.0, "fy": 600.0, "cx": 320.0, "cy": 240.0,
                       "width": 640, "height": 480},
        "marker_spec": {"id": 7, "side_length": 0.1},
        "object_model": {
            "class_id": 1,
            "class_name": "target",
            "extent_box": [
                [dx * 0.06, dy * 0.06, dz * 0.06]
                for dx in (-1, 1) for dy in (-1, 1) for dz in (-1, 1)
            ],
        },
        "synthetic_images": True,
    }


def record_session(client, clock, mode_name: str, frame_period_ms: int) -> dict:
    resp = client.post("/sessions", json=config_payload(mode_name))
    assert resp.status_code == 201, resp.text
    session_id = resp.json()["session_id"]

    status_countdown = client.get(f"/sessions/{session_id}/status").json()
    clock.advance(COUNTDOWN_SECONDS)
    status_ready = client.get(f"/sessions/{session_id}/status").json()

    sim_config = simulate_config(n=N_PATCHES, marker_size=0.1)
    layout = build_hemisphere_layout(N_PATCHES, sim_config.display_radius)
    entries = record_replay(sim_config, scripted_trajectory(layout, 1.75),
                            frame_period_ms=frame_period_ms)

    frames = []
    for entry in entries:
        clock.advance(frame_period_ms / 1000.0)
        resp = client.post(
            f"/sessions/{session_id}/frames",
            files={"image": ("frame.png", PLACEHOLDER_PNG, "image/png")},
            data={"observations": json.dumps(entry)},
        )
        assert resp.status_code == 200, resp.text
        frames.append(
            {
                "request": entry,
                "response": resp.json(),
                "status_after": client.get(f"/sessions/{session_id}/status").json(),
            }
        )
    assert frames[-1]["response"]["finished"], "session did not finish"

    return {
        "config": config_payload(mode_name),
        "session_id": session_id,
        "status_countdown": status_countdown,
        "status_ready": status_ready,
        "frames": frames,
        "ranking": client.get("/ranking").json(),
    }


def main():
    import tempfile

    clock = ManualClock()
    engine = SessionEngine(SessionStore(tempfile.mkdtemp(prefix="hemicap-fixture-")),
                           clock=clock)
    client = TestClient(create_app(engine))

    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    # Two sessions against one store so the second fixture's ranking has both.
    for mode_name, period in (("full", 100), ("no-hm", 50)):
        fixture = record_session(client, clock, mode_name, period)
        out = FIXTURE_DIR / f"session_{mode_name.replace('-', '_')}.json"
        out.write_text(json.dumps(fixture, indent=2) + "\n")
        print(f"wrote {out} ({len(fixture['frames'])} frames)")


if __name__ == "__main__":
    main()
