"""Tone-set description of optical spectra and the two modulator stages.

Optical fields are tracked as discrete tones carrying power only (no phase).
The probe arm uses carrier-suppressed double-sideband modulation by the swept
source followed by single-sideband modulation by the unknown RF tones; the
pump arm uses the same single-sideband stage driven by a two-tone signal.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import InvalidInputError

#: tones closer than this are merged by linear power addition
MERGE_TOLERANCE_HZ = 1e3

DEFAULT_CARRIER_SUPPRESSION_DB = 30.0
DEFAULT_CONVERSION_LOSS_DB = 6.0


def dbm_to_mw(p_dbm):
    return 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def mw_to_dbm(p_mw):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(p_mw, dtype=float))


@dataclass(frozen=True)
class OpticalTone:
    frequency: float  # Hz
    power: float  # dBm

    def __post_init__(self):
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise InvalidInputError(f"tone frequency must be positive, got {self.frequency!r}")
        if not math.isfinite(self.power):
            raise InvalidInputError(f"tone power must be finite, got {self.power!r}")

    @property
    def power_mw(self) -> float:
        return 10.0 ** (self.power / 10.0)


def _merge(tones: Iterable[OpticalTone]) -> tuple[OpticalTone, ...]:
    ordered = sorted(tones, key=lambda t: (t.frequency, -t.power))
    merged: list[list[OpticalTone]] = []
    for tone in ordered:
        if merged and tone.frequency - merged[-1][0].frequency < MERGE_TOLERANCE_HZ:
            merged[-1].append(tone)
        else:
            merged.append([tone])
    out = []
    for cluster in merged:
        if len(cluster) == 1:
            out.append(cluster[0])
            continue
        # keep the strongest member's frequency so every frequency stays traceable
        anchor = max(cluster, key=lambda t: (t.power, -t.frequency))
        total = sum(t.power_mw for t in cluster)
        out.append(OpticalTone(anchor.frequency, 10.0 * math.log10(total)))
    return tuple(out)


@dataclass(frozen=True)
class ToneSet:
    """Sorted, de-duplicated collection of optical tones.

    Construction normalizes the input: tones are sorted by frequency and any
    two closer than ``MERGE_TOLERANCE_HZ`` are combined into one.
    """

    tones: tuple[OpticalTone, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "tones", _merge(self.tones))

    def __len__(self) -> int:
        return len(self.tones)

    def __iter__(self):
        return iter(self.tones)

    def __getitem__(self, i) -> OpticalTone:
        return self.tones[i]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([t.frequency for t in self.tones], dtype=float)

    @property
    def powers_dbm(self) -> np.ndarray:
        return np.array([t.power for t in self.tones], dtype=float)

    @property
    def powers_mw(self) -> np.ndarray:
        return dbm_to_mw(self.powers_dbm)

    def total_power_mw(self) -> float:
        return float(self.powers_mw.sum())

    def amplified(self, gain_db: float) -> "ToneSet":
        """Flat optical gain (e.g. an EDFA) applied to every tone."""
        return ToneSet(tuple(OpticalTone(t.frequency, t.power + gain_db) for t in self.tones))

    def union(self, other: "ToneSet") -> "ToneSet":
        return ToneSet(self.tones + other.tones)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["frequency_hz", "power_dbm"])
        for t in self.tones:
            writer.writerow([repr(t.frequency), repr(t.power)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ToneSet":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["frequency_hz", "power_dbm"]:
            raise InvalidInputError("tone CSV must start with header frequency_hz,power_dbm")
        return cls(tuple(OpticalTone(float(f), float(p)) for f, p in rows[1:] if f))


@dataclass(frozen=True)
class SsbConfig:
    sideband: Literal["upper", "lower"] = "upper"
    residual_carrier_rel: float = 0.0  # dB relative to the strongest sideband
    conversion_loss: float = DEFAULT_CONVERSION_LOSS_DB  # dB per sideband

    def __post_init__(self):
        if self.sideband not in ("upper", "lower"):
            raise InvalidInputError(f"sideband must be 'upper' or 'lower', got {self.sideband!r}")
        if self.conversion_loss < 0:
            raise InvalidInputError("conversion_loss must be >= 0")


def cs_dsb_modulate(
    carrier: OpticalTone,
    rf_frequency: float,
    sideband_power: float,
    carrier_suppression: float = DEFAULT_CARRIER_SUPPRESSION_DB,
) -> ToneSet:
    """Carrier-suppressed double-sideband modulation by a single RF tone.

    Returns the two first-order sidebands at ``sideband_power`` dBm each and
    the carrier left over ``carrier_suppression`` dB below its input level.
    """
    if not rf_frequency > 0:
        raise InvalidInputError(f"rf_frequency must be > 0, got {rf_frequency!r}")
    return ToneSet((
        OpticalTone(carrier.frequency - rf_frequency, sideband_power),
        OpticalTone(carrier.frequency, carrier.power - carrier_suppression),
        OpticalTone(carrier.frequency + rf_frequency, sideband_power),
    ))


def _ssb_children(tone: OpticalTone, rf_tones: Sequence[tuple[float, float]],
                  cfg: SsbConfig) -> list[OpticalTone]:
    sign = 1.0 if cfg.sideband == "upper" else -1.0
    base = tone.power - cfg.conversion_loss
    out = [OpticalTone(tone.frequency + sign * f, base + rel) for f, rel in rf_tones]
    # an undriven modulator has no sideband; reference the nominal 0 dB drive level
    strongest = max((base + rel for _, rel in rf_tones), default=base)
    # the carrier is attenuated, never amplified
    out.append(OpticalTone(tone.frequency, min(strongest + cfg.residual_carrier_rel, tone.power)))
    return out


def ssb_modulate(input: ToneSet, rf_tones: Sequence[tuple[float, float]],
                 cfg: SsbConfig = SsbConfig()) -> ToneSet:
    """Single-sideband modulation with a controlled residual carrier.

    Every input tone spawns one sideband per RF tone ``(frequency, power_rel)``
    at ``input power - conversion_loss + power_rel`` and keeps itself at
    ``residual_carrier_rel`` dB relative to its strongest sideband.
    """
    rf_tones = [(float(f), float(p)) for f, p in rf_tones]
    for f, _ in rf_tones:
        if not f > 0:
            raise InvalidInputError(f"rf frequency must be > 0, got {f!r}")
    out: list[OpticalTone] = []
    for tone in input:
        out.extend(_ssb_children(tone, rf_tones, cfg))
    return ToneSet(tuple(out))
