import filecmp
import json

import pytest

from depthgate import cli
from depthgate.store import iter_replay, read_events, read_replay_header


def run_cli(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def gen_args(out_path, kind="entry", extra=()):
    return ["gen", "--kind", kind, "--out", str(out_path),
            "--frame-width", "96", "--frame-height", "72",
            "--head-radius-px", "6", "--speed-px-per-frame", "4", *extra]


def test_gen_writes_replay(tmp_path, capsys):
    out = tmp_path / "e.drf"
    code, stdout, _ = run_cli(gen_args(out), capsys)
    assert code == 0
    w, h, count = read_replay_header(out)
    assert (w, h) == (96, 72)
    assert f"{count} frames" in stdout
    assert "entries=1 exits=0" in stdout


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.drf", tmp_path / "b.drf"
    run_cli(gen_args(a, extra=["--noise-sigma-mm", "15", "--dropout-prob", "0.02"]), capsys)
    run_cli(gen_args(b, extra=["--noise-sigma-mm", "15", "--dropout-prob", "0.02"]), capsys)
    assert filecmp.cmp(a, b, shallow=False)


def test_count_exact_output(tmp_path, capsys):
    replay = tmp_path / "e.drf"
    run_cli(gen_args(replay), capsys)
    code, stdout, _ = run_cli(["count", "--replay-file", str(replay)], capsys)
    assert code == 0
    assert stdout.strip() == "entries=1 exits=0 regret_enter=0 regret_exit=0 occupancy=1"


def test_count_with_log_dir(tmp_path, capsys):
    replay = tmp_path / "x.drf"
    run_cli(gen_args(replay, kind="exit"), capsys)
    log_dir = tmp_path / "logs"
    code, stdout, _ = run_cli(
        ["count", "--replay-file", str(replay), "--log-dir", str(log_dir)], capsys)
    assert code == 0
    assert "exits=1" in stdout
    events = read_events(log_dir / "events.jsonl")
    assert len(events) == 1
    assert (log_dir / "analysis.csv").exists()


def test_count_without_log_dir_writes_nothing(tmp_path, capsys, monkeypatch):
    replay = tmp_path / "e.drf"
    run_cli(gen_args(replay), capsys)
    monkeypatch.chdir(tmp_path)
    run_cli(["count", "--replay-file", str(replay)], capsys)
    assert not (tmp_path / "depthgate-logs").exists()


def test_count_missing_file_fails_cleanly(tmp_path, capsys):
    code, _, stderr = run_cli(["count", "--replay-file", str(tmp_path / "nope.drf")], capsys)
    assert code == 1
    assert "nope.drf" in stderr


def test_serve_rejects_contradictory_source(tmp_path, capsys):
    replay = tmp_path / "e.drf"
    run_cli(gen_args(replay), capsys)
    with pytest.raises(SystemExit) as exc:
        cli.main(["serve", "--source", "synthetic", "--replay-file", str(replay)])
    assert exc.value.code == 2


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "svc.conf"
    cfg.write_text("threshold-mm = 900\nbogus-key = 1\n")
    replay = tmp_path / "e.drf"
    run_cli(gen_args(replay), capsys)
    with pytest.raises(SystemExit) as exc:
        cli.main(["count", "--config", str(cfg), "--replay-file", str(replay)])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "bogus-key" in err


def test_config_file_applies_and_flags_win(tmp_path, capsys):
    # a 300mm threshold sees nothing at 500mm head depth; the flag restores it
    cfg = tmp_path / "svc.conf"
    cfg.write_text("threshold-mm = 300\n")
    replay = tmp_path / "e.drf"
    run_cli(gen_args(replay), capsys)
    _, stdout, _ = run_cli(["count", "--config", str(cfg), "--replay-file", str(replay)], capsys)
    assert "entries=0" in stdout
    _, stdout, _ = run_cli(
        ["count", "--config", str(cfg), "--replay-file", str(replay),
         "--threshold-mm", "1000"], capsys)
    assert "entries=1" in stdout


def test_report_subcommand(tmp_path, capsys):
    replay = tmp_path / "e.drf"
    run_cli(gen_args(replay), capsys)
    log_dir = tmp_path / "logs"
    run_cli(["count", "--replay-file", str(replay), "--log-dir", str(log_dir)], capsys)
    code, stdout, _ = run_cli(
        ["report", "--events-file", str(log_dir / "events.jsonl"),
         "--bucket", "1000000"], capsys)
    assert code == 0
    doc = json.loads(stdout)
    assert doc["totals"]["entries"] == 1
    assert doc["occupancy_end"] == 1


def test_report_empty_log(tmp_path, capsys):
    events = tmp_path / "events.jsonl"
    events.write_text("")
    code, stdout, _ = run_cli(["report", "--events-file", str(events)], capsys)
    assert code == 0
    doc = json.loads(stdout)
    assert doc["totals"] == {"entries": 0, "exits": 0, "regret_enter": 0, "regret_exit": 0}


def test_gen_stationary_uses_frames_flag(tmp_path, capsys):
    out = tmp_path / "s.drf"
    code, stdout, _ = run_cli(
        gen_args(out, kind="loiter", extra=["--frames", "17"]), capsys)
    assert code == 0
    assert read_replay_header(out)[2] == 17
    assert "entries=0 exits=0" in stdout


def test_gen_replay_frames_are_indexed(tmp_path, capsys):
    out = tmp_path / "e.drf"
    run_cli(gen_args(out), capsys)
    idx = [f.frame_index for f in iter_replay(out)]
    assert idx == list(range(len(idx)))
