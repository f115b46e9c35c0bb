import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbsfreq.errors import NoPulseError, ParseError
from sbsfreq.estimator import detect_pulses
from sbsfreq.receiver import (
    Trace,
    detected_power,
    noise_sigma_estimate,
    pulse_fwhm_time,
    read_trace_csv,
    synthesize_trace,
    write_trace_csv,
)
from sbsfreq.sweep import NoiseModel, ReductionConfig, Scenario, SweepConfig, predicted_pulse_time

UNREDUCED = ReductionConfig(enabled=False)


def lorentzian_pulse_width(g0_db, linewidth, rate):
    """Time FWHM of the excess power 10**(G/10) - 1 for a Lorentzian G swept at ``rate``."""
    g_half = 10 * math.log10((10 ** (g0_db / 10) + 1) / 2)
    return linewidth * math.sqrt(g0_db / g_half - 1) / rate


def test_trace_validation():
    with pytest.raises(ValueError):
        Trace(0.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        Trace(1.0, 0.0, [])
    with pytest.raises(ValueError):
        Trace(1.0, 0.0, [math.nan])


def test_sample_count_and_times():
    scn = Scenario(duration=0.55)
    tr = synthesize_trace(scn)
    assert len(tr) == 55000
    assert tr.times[0] == scn.t0
    assert tr.times[1] - tr.times[0] == pytest.approx(1e-5)


@pytest.mark.parametrize("unknowns, n_pulses", [
    ((), 2),
    (((0.5e9, 7.0),), 3),
    (((0.5e9, 1.0), (1.5e9, 1.0), (2.5e9, 1.0), (3.0e9, 1.0)), 6),
])
def test_pulse_structure(unknowns, n_pulses):
    tr = synthesize_trace(Scenario(unknown_rf=unknowns))
    assert len(detect_pulses(tr)) == n_pulses


def test_noiseless_trace_is_baseline_plus_pulses():
    scn = Scenario(noise=NoiseModel(0.0, 1e-4))
    tr = synthesize_trace(scn)
    assert tr.samples.min() >= 1e-4
    # off resonance the detector sees the 5 dBm sweep sideband less the 6 dB SSB loss
    assert np.median(tr.samples) == pytest.approx(10 ** -0.1 * 1e-3 + 1e-4, rel=1e-3)


def test_determinism_and_seed_dependence():
    scn = Scenario(unknown_rf=((1e9, 5.0),), noise=NoiseModel(2e-5, 5e-5), seed=7)
    a, b = synthesize_trace(scn), synthesize_trace(scn)
    assert np.array_equal(a.samples, b.samples) and a.digest == b.digest
    c = synthesize_trace(replace(scn, seed=8))
    assert not np.array_equal(a.samples, c.samples)


def test_noise_sigma_estimate():
    scn = Scenario(noise=NoiseModel(3e-5, 0.0), seed=3)
    tr = synthesize_trace(scn)
    assert noise_sigma_estimate(tr.samples) == pytest.approx(3e-5, rel=0.05)


def test_pulse_width_matches_closed_form():
    scn = Scenario(unknown_rf=((0.5e9, 4.0),), reduction=UNREDUCED)
    tr = synthesize_trace(scn)
    t = predicted_pulse_time(0.5e9, scn.sweep, scn.brillouin)
    g0 = scn.brillouin.peak_gain_db_per_mw * 10 ** (scn.pump_power_dbm / 10)
    expected = lorentzian_pulse_width(g0, scn.brillouin.linewidth, scn.sweep.rate)
    assert pulse_fwhm_time(tr, t) == pytest.approx(expected, rel=0.01)


def test_pulse_width_small_gain_limit():
    # in the low-gain limit the pulse width tends to linewidth / rate
    scn = Scenario(unknown_rf=((0.5e9, 4.0),), reduction=UNREDUCED, pump_power_dbm=-20.0)
    tr = synthesize_trace(scn)
    t = predicted_pulse_time(0.5e9, scn.sweep, scn.brillouin)
    assert pulse_fwhm_time(tr, t) == pytest.approx(21.6e6 / 16e9, rel=0.03)


@settings(max_examples=8, deadline=None)
@given(st.floats(0.3e9, 7.5e9), st.floats(-2.0, 7.0))
def test_reduced_pulse_narrower(f, p):
    scn = Scenario(unknown_rf=((f, p),))
    t = predicted_pulse_time(f, scn.sweep, scn.brillouin)
    reduced = pulse_fwhm_time(synthesize_trace(scn), t)
    natural = pulse_fwhm_time(synthesize_trace(replace(scn, reduction=UNREDUCED)), t)
    assert reduced < natural


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(0, 74), min_size=1, max_size=5, unique=True))
def test_pulse_count_law(slots):
    # 100 MHz slots keep every pair far beyond the pulse width
    tones = tuple((0.3e9 + 0.1e9 * k, 4.0) for k in slots)
    tr = synthesize_trace(Scenario(unknown_rf=tones))
    assert len(detect_pulses(tr)) == len(tones) + 2


def test_flat_trace_has_no_pulse():
    tr = Trace(1e5, 0.0, np.full(1000, 1e-4))
    with pytest.raises(NoPulseError):
        pulse_fwhm_time(tr, 5e-3)


def test_detected_power_scales_with_baseline():
    scn = Scenario(noise=NoiseModel(0.0, 0.0))
    t = np.array([scn.reference_time + 0.1])
    shifted = replace(scn, noise=NoiseModel(0.0, 1e-3))
    assert detected_power(shifted, t)[0] - detected_power(scn, t)[0] == pytest.approx(1e-3)


def test_trace_csv_round_trip(tmp_path):
    tr = synthesize_trace(Scenario(unknown_rf=((2e9, 3.0),), noise=NoiseModel(2e-5, 5e-5), seed=11))
    path = write_trace_csv(tr, tmp_path / "t.csv")
    back = read_trace_csv(path)
    assert np.array_equal(back.samples, tr.samples)
    assert back.t0 == tr.t0 and back.sample_rate == tr.sample_rate and back.digest == tr.digest
    write_trace_csv(back, tmp_path / "u.csv")
    assert (tmp_path / "u.csv").read_bytes() == path.read_bytes()


def _small_trace_file(tmp_path):
    path = tmp_path / "s.csv"
    write_trace_csv(Trace(1e5, 0.0, [1.0, 2.0, 3.0], "abc"), path)
    return path


def test_truncated_trace_rejected(tmp_path):
    path = _small_trace_file(tmp_path)
    lines = path.read_text().splitlines(keepends=True)
    path.write_text("".join(lines[:-1]))
    with pytest.raises(ParseError, match="truncated"):
        read_trace_csv(path)
    path.write_text("".join(lines)[:-1])
    with pytest.raises(ParseError, match="truncated"):
        read_trace_csv(path)


@pytest.mark.parametrize("mutate, where", [
    (lambda ls: ["time_s,power_w\n"] + ls[1:], ":1:"),
    (lambda ls: ls[:1] + ["t,p\n"] + ls[2:], ":2:"),
    (lambda ls: ls[:3] + ["1.0e-5,oops\n"] + ls[4:], ":4:"),
    (lambda ls: ls[:3] + ["1.0e-5\n"] + ls[4:], ":4:"),
])
def test_malformed_trace_names_line(tmp_path, mutate, where):
    path = _small_trace_file(tmp_path)
    path.write_text("".join(mutate(path.read_text().splitlines(keepends=True))))
    with pytest.raises(ParseError, match=where):
        read_trace_csv(path)


def test_dead_time_shifts_signal_pulse():
    base = Scenario(unknown_rf=((1e9, 7.0),))
    held = replace(base, sweep=SweepConfig(switch_dead_time=5e-3))
    a = detect_pulses(synthesize_trace(base))
    b = detect_pulses(synthesize_trace(held))
    gap_a = a[1].center - a[0].center
    gap_b = b[1].center - b[0].center
    assert gap_b > gap_a
