from pathlib import Path

import pytest

from sbsfreq.config import (
    KEYS,
    calibration_tones,
    detect_from_settings,
    keys_help,
    load_settings,
    parse_override,
    parse_text,
    scenario_from_settings,
)
from sbsfreq.errors import ConfigError

EXAMPLE = Path(__file__).resolve().parents[1] / "configs" / "four_tones.toml"


def test_example_config_builds_scenario():
    scn = scenario_from_settings(load_settings(EXAMPLE))
    assert scn.seed == 42
    assert scn.unknown_rf == ((0.5e9, 1.0), (1.5e9, 1.0), (2.5e9, 1.0), (3.0e9, 1.0))
    assert scn.sweep.switch_dead_time == 5e-3
    assert scn.reduction.pump_tones == (21.570e9, 21.599e9)


def test_inline_unknowns_and_sections():
    s = parse_text("unknowns = [[1e9, 3.0], [2e9, 4]]\n[probe]\nsideband = 'lower'\n")
    assert s["unknowns"] == ((1e9, 3.0), (2e9, 4.0))
    assert s["probe.sideband"] == "lower"


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="'sweep.f_strat'"):
        parse_text("[sweep]\nf_strat = 1e9\n", "cfg.toml")


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_text("seed = 1\nsample_rate = = 3\n", "cfg.toml")


def test_type_error_names_key():
    with pytest.raises(ConfigError, match="'seed'"):
        parse_text("seed = 'abc'\n")
    with pytest.raises(ConfigError, match="'reduction.enabled'"):
        parse_text("[reduction]\nenabled = 1\n")


def test_overrides_take_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("seed = 3\n[noise]\nadditive_sigma = 1e-5\n")
    s = load_settings(cfg, ["seed=9", "reduction.loss_ratio=auto"])
    assert s["seed"] == 9 and s["noise.additive_sigma"] == 1e-5
    assert s["reduction.loss_ratio"] is None


def test_parse_override_forms():
    assert parse_override("a.b=1.5") == ("a.b", 1.5)
    assert parse_override("x=[1, 2]") == ("x", [1, 2])
    assert parse_override("probe.sideband=lower") == ("probe.sideband", "lower")
    with pytest.raises(ConfigError):
        parse_override("novalue")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_settings(tmp_path / "nope.toml")


def test_invalid_scenario_is_config_error():
    with pytest.raises(ConfigError, match="outside measurable band"):
        scenario_from_settings(load_settings(overrides={"unknowns": [[9e9, 0.0]]}))
    with pytest.raises(ConfigError):
        detect_from_settings(load_settings(overrides={"detect.threshold_rel": 2.0}))


def test_help_lists_every_key():
    text = keys_help()
    for key in KEYS:
        assert key in text


def test_default_calibration_grid():
    tones = calibration_tones(load_settings())
    assert len(tones) == 741
    assert tones[0] == 0.3e9 and tones[-1] == 7.7e9 and tones[20] == 0.5e9


def test_explicit_calibration_tones():
    assert calibration_tones(load_settings(overrides={"calibration.tones": [1e9]})) == (1e9,)
