import json
from pathlib import Path

import pytest

from sbsfreq.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_IO, build_parser, main
from sbsfreq.config import KEYS
from sbsfreq.estimator import CalibrationModel

EXAMPLE = Path(__file__).resolve().parents[1] / "configs" / "four_tones.toml"


def test_help_enumerates_config_keys(capsys):
    for argv in (["--help"], ["run", "--help"], ["simulate", "--help"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for key in KEYS:
            assert key in out


def test_each_operation_has_one_subcommand():
    sub = next(a for a in build_parser()._actions if a.dest == "command")
    assert sorted(sub.choices) == ["analyze", "calibrate", "run", "simulate", "spectrum"]


def test_spectrum_command(tmp_path, capsys):
    out = tmp_path / "spec.csv"
    assert main(["spectrum", "--out", str(out), "--span", "50e6", "--step", "1e6"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "nu_hz,gain_db" and len(lines) == 102
    assert "fwhm_hz=1029" in capsys.readouterr().err


def test_simulate_then_analyze(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    cal = tmp_path / "cal.json"
    cal.write_text(CalibrationModel(16e9 / 0.99, -16e9 / 0.99 * 5e-3).to_json())
    assert main(["simulate", "--config", str(EXAMPLE), "--out", str(trace)]) == 0
    report = tmp_path / "r.json"
    assert main(["analyze", str(trace), str(cal), "--truth", "0.5e9", "1.5e9", "2.5e9", "3e9",
                 "--out", str(report)]) == 0
    d = json.loads(report.read_text())
    assert len(d["estimates_hz"]) == 4 and d["pulse_count"] == 6
    assert max(abs(e) for e in d["errors_hz"]) < 2.5e6


def test_analyze_truncated_trace(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    main(["simulate", "--out", str(trace), "--set", "unknowns=[[1e9, 7.0]]"])
    text = trace.read_text()
    trace.write_text(text[: len(text) // 2])
    cal = tmp_path / "cal.json"
    cal.write_text(CalibrationModel(16e9, 0.0).to_json())
    assert main(["analyze", str(trace), str(cal)]) == EXIT_CONFIG
    assert "truncated" in capsys.readouterr().err


def test_analyze_bad_calibration_json(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    main(["simulate", "--out", str(trace)])
    cal = tmp_path / "cal.json"
    cal.write_text('{"slope_hz_per_s": 1.0}')
    assert main(["analyze", str(trace), str(cal)]) == EXIT_CONFIG
    assert "intercept_hz" in capsys.readouterr().err


def test_calibrate_single_tone_is_degenerate(tmp_path, capsys):
    code = main(["calibrate", "--set", "calibration.tones=[1e9]", "--out", str(tmp_path / "c.json")])
    assert code == EXIT_CONFIG
    assert "need 2" in capsys.readouterr().err


def test_calibrate_noiseless_grid(tmp_path, capsys):
    out = tmp_path / "c.json"
    code = main(["calibrate", "--set", "noise.additive_sigma=0.0", "--set", "calibration.f_step=0.2e9",
                 "--out", str(out)])
    assert code == 0
    cal = CalibrationModel.from_json(out.read_text())
    rate = 8e9 / 0.495
    assert cal.slope == pytest.approx(rate, rel=1e-3)
    assert cal.residual_rms < rate / 1e5
    assert "slope_hz_per_s=" in capsys.readouterr().out


def test_bad_config_key_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[sweep]\nperiodd = 0.5\n")
    assert main(["run", "spectrum", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "sweep.periodd" in capsys.readouterr().err


def test_check_failure_exit_code(tmp_path, capsys):
    argv = ["run", "spectrum", "--out", str(tmp_path / "o"), "--no-figures",
            "--set", "reduction.loss_ratio=0.3"]
    assert main(argv + ["--check"]) == EXIT_CHECK
    assert main(argv) == 0
    assert "FAIL fwhm[reduced]" in capsys.readouterr().out


def test_io_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "spectrum", "--out", str(blocker / "sub"), "--no-figures"]) == EXIT_IO


def test_output_root_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SBSFREQ_OUTPUT_ROOT", str(tmp_path / "root"))
    assert main(["run", "spectrum", "--check"]) == 0
    manifest = json.loads((tmp_path / "root" / "spectrum" / "manifest.json").read_text())
    assert manifest["passed"] is True
    for rel in manifest["files"]:
        assert (tmp_path / "root" / "spectrum" / rel).stat().st_size > 0


def test_custom_run_round_trips_through_analyze(tmp_path, capsys):
    out = tmp_path / "custom"
    assert main(["run", "custom", "--config", str(EXAMPLE), "--out", str(out), "--check"]) == 0
    again = tmp_path / "again.json"
    assert main(["analyze", str(out / "trace.csv"), str(out / "calibration.json"),
                 "--truth", "0.5e9", "1.5e9", "2.5e9", "3e9", "--out", str(again)]) == 0
    assert again.read_bytes() == (out / "report.json").read_bytes()


def test_overrides_recorded_in_manifest(tmp_path, capsys):
    out = tmp_path / "o"
    main(["run", "spectrum", "--out", str(out), "--no-figures", "--set", "seed=5",
          "--threshold-rel", "0.4", "--formats", "json"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["overrides"] == {"seed": 5, "detect.threshold_rel": 0.4}
    assert manifest["seed"] == 5
    assert not any(f.endswith(".csv") for f in manifest["files"])
