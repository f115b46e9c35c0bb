import json

import pytest

from sbsfreq.errors import ConfigError
from sbsfreq.experiments import (
    PARTNER_SWEEP_HZ,
    ExperimentSpec,
    derive_seed,
    resolution_limit,
    run_experiment,
)


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(0, 1, 2, 3) == derive_seed(0, 1, 2, 3)
    assert len({derive_seed(0, 1, 2, i) for i in range(100)}) == 100
    assert derive_seed(0, 1) != derive_seed(1, 1)


def test_partner_sweep_grid():
    assert len(PARTNER_SWEEP_HZ) == 37
    assert PARTNER_SWEEP_HZ[0] == 0.4e9 and PARTNER_SWEEP_HZ[-1] == 7.6e9
    assert PARTNER_SWEEP_HZ[1] == 0.6e9


def test_resolution_limit_uses_run_from_top():
    pts = [(20, True), (15, True), (10, False), (5, True)]
    assert resolution_limit(pts) == 15
    assert resolution_limit([(20, False)]) is None


def test_spec_validation(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentSpec("fig9", tmp_path)
    with pytest.raises(ConfigError):
        ExperimentSpec("spectrum", tmp_path, formats=frozenset({"xml"}))
    with pytest.raises(ConfigError):
        ExperimentSpec("spectrum", tmp_path, workers=0)


def test_spectrum_outputs(tmp_path):
    m = run_experiment(ExperimentSpec("spectrum", tmp_path))
    assert m.passed
    summary = json.loads((tmp_path / "spectrum.json").read_text())
    assert summary["reduced"]["fwhm_hz"] == pytest.approx(10.3e6, abs=0.1e6)
    assert summary["unreduced"]["fwhm_hz"] == pytest.approx(21.6e6, abs=1e3)
    header = (tmp_path / "spectrum.csv").read_text().splitlines()[0]
    assert header == "detuning_hz,gain_db,series"
    assert "figures/spectrum.png" in m.files


def test_manifest_lists_existing_files(tmp_path):
    m = run_experiment(ExperimentSpec("resolution", tmp_path))
    d = json.loads((tmp_path / "manifest.json").read_text())
    assert d["files"] == m.files and d["spec_digest"] == m.spec_digest
    for rel in m.files:
        assert (tmp_path / rel).stat().st_size > 0
    limits = json.loads((tmp_path / "resolution.json").read_text())["limit_hz"]
    assert limits["reduced"] < 10e6 < limits["unreduced"] + 1


def test_worker_pool_matches_serial(tmp_path):
    overrides = {"calibration.f_step": 0.5e9}
    a = run_experiment(ExperimentSpec("single_sweep", tmp_path / "a", overrides, figures=False))
    b = run_experiment(ExperimentSpec("single_sweep", tmp_path / "b", overrides, figures=False,
                                      workers=2))
    for rel in a.files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    assert a.files == b.files


def test_calibration_reuse(tmp_path):
    overrides = {"calibration.f_step": 0.5e9}
    run_experiment(ExperimentSpec("single_sweep", tmp_path / "cal", overrides, figures=False))
    m = run_experiment(ExperimentSpec("custom", tmp_path / "c", {"unknowns": [[2e9, 7.0]]},
                                      calibration_path=tmp_path / "cal" / "calibration.json"))
    report = json.loads((tmp_path / "c" / "report.json").read_text())
    assert abs(report["errors_hz"][0]) < 1e6
    assert m.passed
