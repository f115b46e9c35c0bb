"""Photodetector trace synthesis and trace files.

Detection is incoherent: every probe tone inside the optical bandpass is
scaled by the Brillouin net gain at its instantaneous frequency and the
powers are summed. Tone spacings are GHz-scale, far above the 100 kSa/s
acquisition bandwidth, so beat notes average out and phases are not tracked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NoPulseError, ParseError
from .spectral import ToneSet, cs_dsb_modulate, ssb_modulate
from .sweep import NoiseModel, Scenario, sweep_frequency

__all__ = [
    "NoiseModel", "Trace", "synthesize_trace", "pulse_fwhm_time", "probe_tracks",
    "detected_power", "read_trace_csv", "write_trace_csv", "noise_sigma_estimate",
]


@dataclass(eq=False)
class Trace:
    sample_rate: float
    t0: float
    samples: np.ndarray  # W
    digest: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        if self.samples.size == 0:
            raise ValueError("trace has no samples")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("trace samples must be finite")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class ProbeTracks:
    """Probe tones as ``carrier + order * f_sweep(t) + offset`` with fixed power."""

    order: np.ndarray  # -1, 0, +1: which CS-DSB line the tone descends from
    offset: np.ndarray  # Hz
    power_mw: np.ndarray

    def frequencies(self, carrier_hz: float, f_sweep) -> np.ndarray:
        f_sweep = np.asarray(f_sweep, dtype=float)
        return carrier_hz + self.order * f_sweep[..., None] + self.offset


def probe_tracks(scn: Scenario) -> ProbeTracks:
    """Vectorizable form of :func:`sweep.probe_tones`.

    The SSB stage acts on each CS-DSB line independently, so its products
    move rigidly with their parent line as the sweep advances.
    """
    f_ref = scn.sweep.f_start
    swept = cs_dsb_modulate(scn.carrier, f_ref, scn.probe.sideband_power_dbm,
                            scn.probe.carrier_suppression_db)
    order, offset, power = [], [], []
    for m, parent in zip((-1, 0, 1), swept):
        children = ssb_modulate(ToneSet((parent,)), scn.rf_tones_rel, scn.probe.ssb)
        for tone in children:
            order.append(m)
            offset.append(tone.frequency - parent.frequency)
            power.append(tone.power_mw)
    return ProbeTracks(np.array(order, float), np.array(offset, float), np.array(power, float))


def detected_power(scn: Scenario, times) -> np.ndarray:
    """Noiseless detected power in W (baseline included) at the given times."""
    times = np.asarray(times, dtype=float)
    tracks = probe_tracks(scn)
    lo, hi = scn.probe.passband
    # tracks that never enter the passband contribute nothing; drop them up front
    ends = np.stack([tracks.order * f + tracks.offset for f in (scn.sweep.f_start, scn.sweep.f_stop)])
    keep = (ends.max(axis=0) >= lo) & (ends.min(axis=0) <= hi)
    tracks = ProbeTracks(tracks.order[keep], tracks.offset[keep], tracks.power_mw[keep])
    nu = tracks.frequencies(scn.carrier_hz, sweep_frequency(times, scn.sweep))
    rel = nu - scn.carrier_hz
    passed = (rel >= lo) & (rel <= hi)
    gain = np.zeros_like(nu)
    gain[passed] = scn.spectrum(nu[passed])
    p_mw = np.where(passed, tracks.power_mw * 10.0 ** (gain / 10.0), 0.0).sum(axis=-1)
    return p_mw * 1e-3 + scn.noise.baseline


def noise_stream(seed: int, n: int) -> np.ndarray:
    """Standard normal samples from a counter-based (Philox) generator."""
    return np.random.Generator(np.random.Philox(seed)).standard_normal(n)


def synthesize_trace(scn: Scenario) -> Trace:
    n = scn.n_samples
    times = scn.t0 + np.arange(n) / scn.sample_rate
    samples = detected_power(scn, times)
    if scn.noise.additive_sigma > 0:
        samples = samples + scn.noise.additive_sigma * noise_stream(scn.seed, n)
    return Trace(scn.sample_rate, scn.t0, samples, scn.digest())


def noise_sigma_estimate(samples: np.ndarray) -> float:
    """Robust white-noise std from the median absolute first difference."""
    d = np.diff(np.asarray(samples, dtype=float))
    if d.size == 0:
        return 0.0
    return float(1.4826 * np.median(np.abs(d - np.median(d))) / math.sqrt(2.0))


def _crossing(t_a, y_a, t_b, y_b, level):
    if y_b == y_a:
        return t_a
    return t_a + (level - y_a) * (t_b - t_a) / (y_b - y_a)


def pulse_fwhm_time(trace: Trace, around: float, search: float = 2e-3,
                    baseline: float | None = None) -> float:
    """FWHM in seconds of the pulse whose maximum lies within ``around +- search``.

    Half maximum is taken above the baseline (trace median unless given);
    both edges are located by linear interpolation between samples.
    """
    y = trace.samples
    base = float(np.median(y)) if baseline is None else baseline
    i0 = max(int(math.floor((around - search - trace.t0) * trace.sample_rate)), 0)
    i1 = min(int(math.ceil((around + search - trace.t0) * trace.sample_rate)) + 1, y.size)
    if i1 - i0 < 3:
        raise NoPulseError(f"search window around t={around:.6g} s lies outside the trace")
    k = i0 + int(np.argmax(y[i0:i1]))
    amp = y[k] - base
    floor = max(5.0 * noise_sigma_estimate(y), 1e-12 * max(abs(base), 1e-30))
    if amp <= floor:
        raise NoPulseError(f"no pulse near t={around:.6g} s")
    half = base + 0.5 * amp
    t = trace.times
    left = k
    while left > 0 and y[left - 1] >= half:
        left -= 1
    right = k
    while right < y.size - 1 and y[right + 1] >= half:
        right += 1
    if left == 0 or right == y.size - 1:
        raise NoPulseError(f"pulse near t={around:.6g} s is cut by the trace edge")
    t_l = _crossing(t[left - 1], y[left - 1], t[left], y[left], half)
    t_r = _crossing(t[right], y[right], t[right + 1], y[right + 1], half)
    return float(t_r - t_l)


def write_trace_csv(trace: Trace, path) -> Path:
    path = Path(path)
    lines = [
        f"# scenario_digest={trace.digest} sample_rate={trace.sample_rate!r} "
        f"t0={trace.t0!r} n_samples={trace.samples.size}",
        "time_s,power_w",
    ]
    t = trace.times
    lines.extend(f"{ti!r},{yi!r}" for ti, yi in zip(t.tolist(), trace.samples.tolist()))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_trace_csv(path) -> Trace:
    path = Path(path)
    text = path.read_text()
    lines = text.split("\n")
    if not lines or not lines[0].startswith("#"):
        raise ParseError(f"{path}:1: missing '# scenario_digest=...' comment line")
    meta = {}
    for item in lines[0][1:].split():
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"{path}:1: malformed metadata item {item!r}")
        meta[key] = value
    try:
        sample_rate = float(meta["sample_rate"])
        t0 = float(meta["t0"])
        n_expected = int(meta["n_samples"])
    except KeyError as exc:
        raise ParseError(f"{path}:1: missing metadata field {exc.args[0]}") from None
    except ValueError as exc:
        raise ParseError(f"{path}:1: bad metadata value ({exc})") from None
    if len(lines) < 2 or lines[1].strip() != "time_s,power_w":
        raise ParseError(f"{path}:2: expected header 'time_s,power_w'")
    if not text.endswith("\n"):
        raise ParseError(f"{path}:{len(lines)}: file truncated (no trailing newline)")
    body = lines[2:-1]
    samples = np.empty(len(body))
    for i, line in enumerate(body):
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{path}:{i + 3}: expected 2 fields, got {len(parts)}")
        try:
            samples[i] = float(parts[1])
        except ValueError:
            raise ParseError(f"{path}:{i + 3}: non-numeric power value {parts[1]!r}") from None
        if not math.isfinite(samples[i]):
            raise ParseError(f"{path}:{i + 3}: non-finite power value")
    if samples.size != n_expected:
        raise ParseError(
            f"{path}:{len(body) + 2}: trace truncated, {samples.size} of {n_expected} samples")
    return Trace(sample_rate, t0, samples, meta.get("scenario_digest", ""))
