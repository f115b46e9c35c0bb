from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbsfreq.brillouin import BrillouinParams, bandwidth_3db
from sbsfreq.errors import InvalidInputError, OutOfRangeError
from sbsfreq.sweep import (
    CARRIER_HZ,
    ReductionConfig,
    Scenario,
    SweepConfig,
    measurable_band,
    predicted_pulse_time,
    probe_tones,
    sweep_frequency,
)

PARAMS = BrillouinParams()
CFG16 = SweepConfig(10.5e9, 18.5e9, 0.5, 11e9, 0.0)
DEAD = SweepConfig(switch_dead_time=5e-3)


def test_sweep_frequency_examples():
    assert sweep_frequency(0.0, CFG16) == 10.5e9
    assert sweep_frequency(0.25, CFG16) == pytest.approx(14.5e9)
    assert sweep_frequency(0.5, CFG16) == pytest.approx(10.5e9)
    assert CFG16.rate == 16e9


def test_sweep_hold_at_switch():
    t_sw = DEAD.switch_time
    t = np.array([t_sw + 1e-4, t_sw + 4.9e-3])
    assert np.all(sweep_frequency(t, DEAD) == DEAD.switch_freq)
    assert sweep_frequency(DEAD.period - 1e-9, DEAD) == pytest.approx(DEAD.f_stop, rel=1e-9)


def test_sweep_config_validation():
    with pytest.raises(InvalidInputError):
        SweepConfig(f_start=12e9)
    with pytest.raises(InvalidInputError):
        SweepConfig(switch_dead_time=0.5)


def test_measurable_band():
    lo, hi = measurable_band(SweepConfig(), PARAMS)
    assert lo == pytest.approx(0.208e9)
    assert hi == pytest.approx(7.708e9)


def test_predicted_pulse_time_examples():
    assert predicted_pulse_time(0.0, CFG16, PARAMS) == pytest.approx(0.01825)
    assert predicted_pulse_time(0.5e9, CFG16, PARAMS) == pytest.approx(0.0495)
    t_edge = predicted_pulse_time(7.708e9 - 1.0, CFG16, PARAMS)
    assert t_edge < CFG16.period and t_edge == pytest.approx(CFG16.period, abs=1e-6)
    with pytest.raises(OutOfRangeError):
        predicted_pulse_time(8e9, CFG16, PARAMS)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.208e9, 7.708e9 - 1.0), st.floats(0.0, 0.02))
def test_pulse_time_round_trip(f_k, dead):
    cfg = SweepConfig(switch_dead_time=dead)
    t = predicted_pulse_time(f_k, cfg, PARAMS)
    assert abs(sweep_frequency(t, cfg) - (PARAMS.f_sbs + f_k)) <= 1.0
    assert predicted_pulse_time(0.0, cfg, PARAMS) < t


@pytest.mark.parametrize("dead", [0.0, 5e-3])
def test_pulse_time_at_upper_band_edge(dead):
    # the top of the band is crossed at the end of the ramp, where the sawtooth wraps
    cfg = SweepConfig(switch_dead_time=dead)
    t = predicted_pulse_time(7.708e9, cfg, PARAMS)
    assert t == pytest.approx(cfg.period, abs=1e-12)
    assert sweep_frequency(t - 1e-9, cfg) == pytest.approx(PARAMS.f_sbs + 7.708e9, abs=100.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 7.7e9), st.floats(1e3, 1e9))
def test_pulse_time_monotone(f, df):
    f2 = min(f + df, 7.708e9)
    if f2 > f:
        assert predicted_pulse_time(f2, DEAD, PARAMS) > predicted_pulse_time(f, DEAD, PARAMS)


def test_dead_time_widens_straddling_gap():
    edge = DEAD.switch_freq - PARAMS.f_sbs
    df = 50e6
    straddle = predicted_pulse_time(edge + df / 2, DEAD, PARAMS) - predicted_pulse_time(edge - df / 2, DEAD, PARAMS)
    same_side = predicted_pulse_time(edge + 3 * df, DEAD, PARAMS) - predicted_pulse_time(edge + 2 * df, DEAD, PARAMS)
    assert straddle - same_side == pytest.approx(DEAD.switch_dead_time, abs=1e-12)


@pytest.mark.parametrize("unknowns, count", [((), 3), (((0.5e9, 7.0),), 6),
                                             (((0.5e9, 1), (1.5e9, 1), (2.5e9, 1), (3e9, 1)), 15)])
def test_probe_tone_counts(unknowns, count):
    scn = Scenario(unknown_rf=unknowns)
    tones = probe_tones(0.1, scn)
    assert len(tones) == count
    f_sw = sweep_frequency(0.1, scn.sweep)
    assert {CARRIER_HZ - f_sw, CARRIER_HZ, CARRIER_HZ + f_sw} <= set(tones.frequencies)


def test_scenario_validation():
    with pytest.raises(InvalidInputError):
        Scenario(unknown_rf=((0.1e9, 0.0),))
    with pytest.raises(InvalidInputError):
        Scenario(duration=0.1)
    assert Scenario(duration=0.6).n_samples == 60000


def test_scenario_window_and_samples():
    scn = Scenario()
    assert scn.t0 == pytest.approx(scn.reference_time - scn.window_margin)
    assert scn.n_samples == 52000


def test_scenario_digest_changes_with_content():
    a = Scenario(unknown_rf=((0.5e9, 7.0),))
    assert a.digest() == Scenario(unknown_rf=((0.5e9, 7.0),)).digest()
    assert a.digest() != replace(a, seed=1).digest()


def test_reduced_scenario_bandwidth():
    scn = Scenario()
    centre = scn.carrier_hz - scn.brillouin.f_sbs
    _, fwhm = bandwidth_3db(scn.spectrum, (centre - 80e6, centre + 80e6))
    assert fwhm == pytest.approx(10.3e6, abs=0.1e6)
    off = replace(scn, reduction=ReductionConfig(enabled=False))
    assert bandwidth_3db(off.spectrum, (centre - 80e6, centre + 80e6))[1] == pytest.approx(21.6e6, abs=1e3)


def test_reduced_pump_carrier_at_launch_level():
    scn = Scenario()
    carrier = next(t for t in scn.pump if t.frequency == scn.carrier_hz)
    assert carrier.power == pytest.approx(scn.pump_power_dbm)
    side = [t.power_mw for t in scn.pump if t.frequency != scn.carrier_hz]
    assert side == pytest.approx([scn.loss_ratio] * 2)


def test_exact_pump_rule():
    scn = Scenario(reduction=ReductionConfig(pump_tones=None))
    centre = scn.carrier_hz - scn.brillouin.f_sbs
    near = sorted(c.center - centre for c in scn.spectrum.losses() if abs(c.center - centre) < 1e9)
    assert near == pytest.approx([-14.5e6, 14.5e6], abs=1e-3)
