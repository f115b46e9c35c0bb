"""Swept source, scenario definition and the frequency-to-time forward map."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np

from .brillouin import (
    LOSS_OFFSET_HZ,
    REDUCED_BANDWIDTH_HZ,
    BrillouinParams,
    CompositeSpectrum,
    calibrate_loss_depth,
    composite_spectrum,
)
from .errors import InvalidInputError, OutOfRangeError
from .spectral import (
    DEFAULT_CARRIER_SUPPRESSION_DB,
    OpticalTone,
    SsbConfig,
    ToneSet,
    cs_dsb_modulate,
    ssb_modulate,
)

CARRIER_HZ = 193.08e12
#: two-tone pump drive used in the experiment (offsets differ from 2*f_sbs +- 14.5 MHz by ~0.5 MHz)
PUMP_TWO_TONE_HZ = (21.570e9, 21.599e9)
SAMPLE_RATE_HZ = 1e5


@dataclass(frozen=True)
class SweepConfig:
    f_start: float = 10.5e9
    f_stop: float = 18.5e9
    period: float = 0.5
    switch_freq: float = 11e9
    switch_dead_time: float = 0.0

    def __post_init__(self):
        if not self.f_start < self.switch_freq < self.f_stop:
            raise InvalidInputError("sweep requires f_start < switch_freq < f_stop")
        if not self.period > self.switch_dead_time >= 0:
            raise InvalidInputError("sweep requires period > switch_dead_time >= 0")

    @property
    def rate(self) -> float:
        """Ramp slope in Hz/s over the active (non-hold) part of the period."""
        return (self.f_stop - self.f_start) / (self.period - self.switch_dead_time)

    @property
    def switch_time(self) -> float:
        return (self.switch_freq - self.f_start) / self.rate


@dataclass(frozen=True)
class NoiseModel:
    additive_sigma: float = 0.0  # W, Gaussian std of detected power
    baseline: float = 0.0  # W, detector / ASE floor

    def __post_init__(self):
        if self.additive_sigma < 0 or self.baseline < 0:
            raise InvalidInputError("noise sigma and baseline must be >= 0")


@dataclass(frozen=True)
class ReductionConfig:
    """Two-tone pump that flanks the Brillouin gain with two losses.

    ``loss_ratio=None`` solves the depth for ``target_bandwidth``;
    ``pump_tones=None`` places the tones exactly at ``2*f_sbs -+ offset``.
    """

    enabled: bool = True
    offset: float = LOSS_OFFSET_HZ
    target_bandwidth: float = REDUCED_BANDWIDTH_HZ
    loss_ratio: float | None = None
    pump_tones: tuple[float, float] | None = PUMP_TWO_TONE_HZ

    def __post_init__(self):
        if self.loss_ratio is not None and not 0 <= self.loss_ratio < 1:
            raise InvalidInputError("loss_ratio must lie in [0, 1)")
        if self.pump_tones is not None:
            object.__setattr__(self, "pump_tones", tuple(float(f) for f in self.pump_tones))


@dataclass(frozen=True)
class ProbeConfig:
    laser_power_dbm: float = 10.0
    sideband_power_dbm: float = 5.0  # CS-DSB sideband level out of the swept MZM
    carrier_suppression_db: float = DEFAULT_CARRIER_SUPPRESSION_DB
    ssb: SsbConfig = SsbConfig("upper", residual_carrier_rel=0.0)
    rf_ref_dbm: float = 7.0  # RF drive level that maps to power_rel = 0 dB
    #: optical bandpass filter, relative to the carrier; passes the lower sweep sideband
    passband: tuple[float, float] = (-20e9, -1e9)


@dataclass(frozen=True)
class Scenario:
    sweep: SweepConfig = SweepConfig()
    brillouin: BrillouinParams = BrillouinParams()
    unknown_rf: tuple[tuple[float, float], ...] = ()  # (frequency Hz, power dBm)
    reduction: ReductionConfig = ReductionConfig()
    noise: NoiseModel = NoiseModel()
    duration: float | None = None  # None: one period plus both margins
    seed: int = 0
    sample_rate: float = SAMPLE_RATE_HZ
    carrier_hz: float = CARRIER_HZ
    pump_power_dbm: float = 0.0  # pump carrier level launched into the fiber
    probe: ProbeConfig = ProbeConfig()
    window_margin: float = 0.01  # s recorded before the first reference crossing

    def __post_init__(self):
        object.__setattr__(self, "unknown_rf",
                           tuple((float(f), float(p)) for f, p in self.unknown_rf))
        lo, hi = measurable_band(self.sweep, self.brillouin)
        for f, _ in self.unknown_rf:
            if not lo <= f <= hi:
                raise InvalidInputError(
                    f"unknown frequency {f:.6g} Hz outside measurable band [{lo:.6g}, {hi:.6g}] Hz")
        if not self.sample_rate > 0:
            raise InvalidInputError("sample_rate must be > 0")
        if self.duration is not None and self.duration < self.sweep.period:
            raise InvalidInputError("duration must cover at least one sweep period")
        if not self.sweep.f_start <= self.brillouin.f_sbs <= self.sweep.switch_freq:
            raise InvalidInputError("the reference crossing f_sbs must lie in [f_start, switch_freq]")

    @property
    def carrier(self) -> OpticalTone:
        return OpticalTone(self.carrier_hz, self.probe.laser_power_dbm)

    @property
    def rf_tones_rel(self) -> list[tuple[float, float]]:
        return [(f, p - self.probe.rf_ref_dbm) for f, p in self.unknown_rf]

    @cached_property
    def loss_ratio(self) -> float:
        red = self.reduction
        if not red.enabled:
            return 0.0
        if red.loss_ratio is not None:
            return red.loss_ratio
        return calibrate_loss_depth(self.brillouin, red.offset, red.target_bandwidth,
                                    self.brillouin.peak_gain_db_per_mw)

    @cached_property
    def pump(self) -> ToneSet:
        laser = OpticalTone(self.carrier_hz, self.pump_power_dbm)
        r = self.loss_ratio
        if r <= 0:
            return ToneSet((laser,))
        red = self.reduction
        f_sbs = self.brillouin.f_sbs
        two_tone = red.pump_tones or (2 * f_sbs - red.offset, 2 * f_sbs + red.offset)
        cfg = SsbConfig("lower", residual_carrier_rel=-10.0 * math.log10(r))
        out = ssb_modulate(ToneSet((laser,)), [(f, 0.0) for f in two_tone], cfg)
        # amplifier after the pump modulator restores the carrier to the launch level
        carrier_power = next(t.power for t in out if t.frequency == self.carrier_hz)
        return out.amplified(self.pump_power_dbm - carrier_power)

    @cached_property
    def spectrum(self) -> CompositeSpectrum:
        return composite_spectrum(self.pump, self.brillouin)

    @property
    def reference_time(self) -> float:
        return predicted_pulse_time(0.0, self.sweep, self.brillouin)

    @property
    def t0(self) -> float:
        return self.reference_time - self.window_margin

    @property
    def total_duration(self) -> float:
        if self.duration is not None:
            return self.duration
        return self.sweep.period + 2 * self.window_margin

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.total_duration * self.sample_rate + 1e-9))

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def measurable_band(cfg: SweepConfig, params: BrillouinParams) -> tuple[float, float]:
    """Unknown frequencies whose crossing falls on the usable (post-switch) ramp."""
    return cfg.switch_freq - params.f_sbs, cfg.f_stop - params.f_sbs


def sweep_frequency(t, cfg: SweepConfig):
    """Instantaneous sweep frequency; ``t`` is reduced modulo the period.

    Linear ramp from ``f_start`` to ``f_stop``, held at ``switch_freq`` for
    ``switch_dead_time`` when the ramp reaches it.
    """
    tm = np.mod(np.asarray(t, dtype=float), cfg.period)
    ts, dead, rate = cfg.switch_time, cfg.switch_dead_time, cfg.rate
    f = np.where(tm < ts, cfg.f_start + rate * tm,
                 np.where(tm < ts + dead, cfg.switch_freq, cfg.f_start + rate * (tm - dead)))
    return float(f) if f.ndim == 0 else f


def predicted_pulse_time(f_k: float, cfg: SweepConfig, params: BrillouinParams) -> float:
    """Time within one period at which the sweep reaches ``f_sbs + f_k``."""
    target = params.f_sbs + f_k
    if not cfg.f_start <= target <= cfg.f_stop:
        raise OutOfRangeError(
            f"f_sbs + f_k = {target:.6g} Hz outside sweep [{cfg.f_start:.6g}, {cfg.f_stop:.6g}] Hz")
    t = (target - cfg.f_start) / cfg.rate
    if target > cfg.switch_freq:
        t += cfg.switch_dead_time
    return t


def probe_tones(t: float, scn: Scenario, carrier: OpticalTone | None = None) -> ToneSet:
    """Probe spectrum at time ``t``: swept CS-DSB followed by SSB with the unknowns."""
    carrier = scn.carrier if carrier is None else carrier
    swept = cs_dsb_modulate(carrier, sweep_frequency(t, scn.sweep),
                            scn.probe.sideband_power_dbm, scn.probe.carrier_suppression_db)
    return ssb_modulate(swept, scn.rf_tones_rel, scn.probe.ssb)
