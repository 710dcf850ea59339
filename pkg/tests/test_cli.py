import json

import pytest

from hemicap.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_seeded_runs_are_byte_identical(self, capsys, tmp_path):
        code1, out1, _ = run_cli(
            capsys, "simulate", "--n", "12", "--seed", "7",
            "--store-root", str(tmp_path / "a"),
        )
        code2, out2, _ = run_cli(
            capsys, "simulate", "--n", "12", "--seed", "7",
            "--store-root", str(tmp_path / "b"),
        )
        assert code1 == code2 == 0
        assert out1 == out2
        assert out1.count("frame ") == 12
        assert "capture_time_s=1.200" in out1

    def test_mode_flag_accepted(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, "simulate", "--n", "6", "--mode", "no-hm",
            "--store-root", str(tmp_path / "s"),
        )
        assert code == 0
        assert "finished: 6 frames" in out

    def test_replay_out(self, capsys, tmp_path):
        replay = tmp_path / "replay.json"
        code, _, _ = run_cli(
            capsys, "simulate", "--n", "5", "--store-root", str(tmp_path / "s"),
            "--replay-out", str(replay),
        )
        assert code == 0
        entries = json.loads(replay.read_text())
        assert len(entries) == 5
        assert entries[0]["observations"][0]["marker_id"] == 7


class TestReport:
    def test_empty_store(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "report", "--store-root", str(tmp_path))
        assert code == 0
        assert "no sessions" in out

    def test_tables_over_simulated_store(self, capsys, tmp_path):
        root = str(tmp_path / "store")
        for seed in ("1", "2"):
            run_cli(capsys, "simulate", "--n", "8", "--seed", seed, "--store-root", root)
        run_cli(capsys, "simulate", "--n", "8", "--mode", "no-hm", "--store-root", root)
        code, out, _ = run_cli(capsys, "report", "--store-root", root)
        assert code == 0
        assert "Distance for each trial [m]" in out
        assert "Angular distance for each trial [deg]" in out
        assert "ID rate" in out
        assert "full" in out and "no-hm" in out

    def test_single_session_json(self, capsys, tmp_path):
        root = str(tmp_path / "store")
        run_cli(capsys, "simulate", "--n", "8", "--store-root", root)
        code, out, _ = run_cli(
            capsys, "report", "--store-root", root, "--session", "session-000001"
        )
        assert code == 0
        report = json.loads(out)
        assert report["n_frames"] == 8
        assert report["distance_mean"] == pytest.approx(0.7, rel=0.05)


class TestLayout:
    def test_dump_to_file(self, capsys, tmp_path):
        out_path = tmp_path / "layout.json"
        code, _, _ = run_cli(
            capsys, "layout", "--n", "16", "--radius", "0.4", "--out", str(out_path)
        )
        assert code == 0
        layout = json.loads(out_path.read_text())
        assert layout["n_patches"] == 16
        assert len(layout["centers"]) == 16

    def test_dump_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "layout", "--n", "4", "--radius", "1.0", "--out", "-")
        assert code == 0
        assert json.loads(out)["radius"] == 1.0

    def test_n_one_fails(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "layout", "--n", "1", "--radius", "0.4",
            "--out", str(tmp_path / "x.json"),
        )
        assert code == 2  # runtime failure
        assert "error" in err


class TestTrajectoryFile:
    def test_round_trip_drives_a_session(self, capsys, tmp_path):
        traj_path = tmp_path / "trajectory.json"
        code, _, _ = run_cli(
            capsys, "simulate", "--n", "5", "--store-root", str(tmp_path / "a"),
            "--trajectory-out", str(traj_path),
        )
        assert code == 0 and traj_path.exists()
        code, out, _ = run_cli(
            capsys, "simulate", "--n", "5", "--store-root", str(tmp_path / "b"),
            "--trajectory", str(traj_path),
        )
        assert code == 0
        assert "finished: 5 frames" in out


class TestUsage:
    def test_unknown_command_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_help_lists_subcommands(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for cmd in ("serve", "simulate", "report", "layout"):
            assert cmd in out
