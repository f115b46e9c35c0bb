"""Pulse detection, reference identification, calibration and scoring."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks

from .errors import (
    DegenerateFitError,
    NoReferenceError,
    ParseError,
    ReferenceMismatchError,
    ResolutionFailureError,
)
from .receiver import Trace, noise_sigma_estimate, synthesize_trace
from .sweep import Scenario, SweepConfig

DEFAULT_THRESHOLD_REL = 0.3
DEFAULT_MIN_SEPARATION_SAMPLES = 2
#: a local maximum must rise this many noise sigmas above the valley to its neighbour;
#: peak and valley are both noisy samples, so 8 sigma is ~5.7 std of their difference
DEFAULT_PROMINENCE_SIGMA = 8.0
#: and its valley must be at least this fraction of its own height above baseline
DEFAULT_PROMINENCE_REL = 0.1
PERIOD_TOLERANCE = 0.05


@dataclass(frozen=True)
class PulseEvent:
    center: float  # s, power-weighted centroid
    amplitude: float  # W above baseline
    width: float  # s, FWHM


@dataclass(frozen=True)
class DetectParams:
    threshold_rel: float = DEFAULT_THRESHOLD_REL
    min_separation: float | None = None  # s; None means two samples
    prominence_sigma: float = DEFAULT_PROMINENCE_SIGMA
    prominence_rel: float = DEFAULT_PROMINENCE_REL

    def __post_init__(self):
        if not 0 < self.threshold_rel < 1:
            raise ValueError("threshold_rel must lie in (0, 1)")
        if not 0 <= self.prominence_rel < 1:
            raise ValueError("prominence_rel must lie in [0, 1)")

    def kwargs(self) -> dict:
        return {"threshold_rel": self.threshold_rel, "min_separation": self.min_separation,
                "prominence_sigma": self.prominence_sigma, "prominence_rel": self.prominence_rel}


@dataclass(frozen=True)
class CalibrationModel:
    slope: float  # Hz/s
    intercept: float  # Hz
    residual_rms: float = 0.0  # Hz

    def __post_init__(self):
        if not self.slope > 0:
            raise ValueError("calibration slope must be > 0")

    def __call__(self, t_rel):
        out = self.slope * np.asarray(t_rel, dtype=float) + self.intercept
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"slope_hz_per_s": self.slope, "intercept_hz": self.intercept,
                "residual_rms_hz": self.residual_rms}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationModel":
        try:
            return cls(float(d["slope_hz_per_s"]), float(d["intercept_hz"]),
                       float(d.get("residual_rms_hz", 0.0)))
        except KeyError as exc:
            raise ParseError(f"calibration: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"calibration: bad field value ({exc})") from None

    @classmethod
    def from_json(cls, text: str) -> "CalibrationModel":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"calibration JSON line {exc.lineno}: {exc.msg}") from None
        if not isinstance(d, dict):
            raise ParseError("calibration JSON must be an object")
        return cls.from_dict(d.get("calibration", d))


@dataclass(frozen=True)
class MeasurementReport:
    estimated: tuple[float, ...]
    truth: tuple[float, ...] = ()
    errors: tuple[float, ...] = ()  # estimate - truth, in truth order (matched only)
    rmse: float | None = None
    max_abs_error: float | None = None
    misses: tuple[float, ...] = ()  # truth entries left without an estimate
    calibration: CalibrationModel | None = None
    pulse_count: int = 0

    def to_dict(self) -> dict:
        d = {
            "estimates_hz": list(self.estimated),
            "truth_hz": list(self.truth),
            "errors_hz": list(self.errors),
            "rmse_hz": self.rmse,
            "max_abs_error_hz": self.max_abs_error,
            "misses_hz": list(self.misses),
            "pulse_count": self.pulse_count,
        }
        if self.calibration is not None:
            d["calibration"] = self.calibration.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def rmse(errors) -> float:
    e = np.asarray(errors, dtype=float)
    return float(math.sqrt(np.mean(e * e))) if e.size else 0.0


def detect_pulses(trace: Trace, threshold_rel: float = DEFAULT_THRESHOLD_REL,
                  min_separation: float | None = None,
                  prominence_sigma: float = DEFAULT_PROMINENCE_SIGMA,
                  prominence_rel: float = DEFAULT_PROMINENCE_REL,
                  baseline: float | None = None) -> list[PulseEvent]:
    """Find pulses above ``baseline + threshold_rel * (peak - baseline)``.

    Maxima closer than ``min_separation`` are merged (the larger survives).
    A maximum must also rise above the valley separating it from a taller
    neighbour by ``prominence_sigma`` noise deviations and by
    ``prominence_rel`` of its own height, so ripple on a pulse top and two
    barely separated lines are not counted twice. Each centre is the
    centroid of the above-threshold samples weighted by their power above
    the threshold, split at the lowest sample between neighbours.
    """
    if not 0 < threshold_rel < 1:
        raise ValueError("threshold_rel must lie in (0, 1)")
    y = trace.samples
    fs = trace.sample_rate
    base = float(np.median(y)) if baseline is None else baseline
    peak = float(y.max())
    sigma = noise_sigma_estimate(y)
    span = peak - base
    if span <= max(prominence_sigma * sigma, 0.0) or span <= 1e-12 * max(abs(base), 1e-30):
        return []
    thr = base + threshold_rel * span
    min_sep = DEFAULT_MIN_SEPARATION_SAMPLES / fs if min_separation is None else min_separation
    distance = max(int(round(min_sep * fs)), 1)
    prominence = max(prominence_sigma * sigma, 1e-9 * span)
    idx, props = find_peaks(y, height=thr, distance=distance, prominence=prominence)
    idx = idx[props["prominences"] >= prominence_rel * (y[idx] - base)]
    if idx.size == 0:
        return []

    # split points between neighbouring maxima sit at the lowest sample between them
    splits = [int(a + np.argmin(y[a:b + 1])) for a, b in zip(idx[:-1], idx[1:])]
    events = []
    for n, k in enumerate(idx):
        lo_lim = splits[n - 1] if n > 0 else 0
        hi_lim = splits[n] if n < len(splits) else y.size - 1
        lo = k
        while lo > lo_lim and y[lo - 1] > thr:
            lo -= 1
        hi = k
        while hi < hi_lim and y[hi + 1] > thr:
            hi += 1
        # weights taper to zero at the threshold, so where the region is cut off matters little
        w = y[lo:hi + 1] - thr
        pos = np.arange(lo, hi + 1)
        center_idx = float(np.dot(w, pos) / w.sum())
        amp = float(y[k] - base)
        events.append(PulseEvent(trace.t0 + center_idx / fs, amp,
                                 _half_width(y, k, base + 0.5 * amp, lo_lim, hi_lim) / fs))
    return sorted(events, key=lambda e: e.center)


def _half_width(y, k, half, lo_lim, hi_lim) -> float:
    """Width in samples at ``half`` around index ``k``, interpolated."""
    left = k
    while left > lo_lim and y[left - 1] >= half:
        left -= 1
    right = k
    while right < hi_lim and y[right + 1] >= half:
        right += 1
    xl = float(left)
    if left > lo_lim and y[left] != y[left - 1]:
        xl = left - (y[left] - half) / (y[left] - y[left - 1])
    xr = float(right)
    if right < hi_lim and y[right] != y[right + 1]:
        xr = right + (y[right] - half) / (y[right] - y[right + 1])
    return max(xr - xl, 1.0)


def identify_reference(pulses: Sequence[PulseEvent], cfg: SweepConfig):
    """First and last pulses are the sweep-carrier references; the rest are signals."""
    if len(pulses) < 2:
        raise NoReferenceError(f"need at least 2 pulses to locate references, got {len(pulses)}")
    first, last = pulses[0], pulses[-1]
    spacing = last.center - first.center
    if abs(spacing - cfg.period) > PERIOD_TOLERANCE * cfg.period:
        raise ReferenceMismatchError(
            f"reference spacing {spacing:.6g} s inconsistent with sweep period {cfg.period:.6g} s")
    return first, last, list(pulses[1:-1])


def fit_calibration(points: Sequence[tuple[float, float]]) -> CalibrationModel:
    """Ordinary least-squares line ``f = slope * t + intercept``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    t, f = pts[:, 0], pts[:, 1]
    if np.unique(t).size < 2:
        raise DegenerateFitError("calibration needs at least two distinct pulse times")
    tm, fm = t.mean(), f.mean()
    dt = t - tm
    slope = float(np.dot(dt, f - fm) / np.dot(dt, dt))
    intercept = float(fm - slope * tm)
    resid = f - (slope * t + intercept)
    return CalibrationModel(slope, intercept, rmse(resid))


def analytic_calibration(scn: Scenario) -> CalibrationModel:
    """Noiseless time-to-frequency map implied by the scenario's sweep."""
    cfg = scn.sweep
    return CalibrationModel(cfg.rate, -cfg.rate * cfg.switch_dead_time, 0.0)


def match_truth(estimates: Sequence[float], truth: Sequence[float]):
    """One-to-one nearest-neighbour pairing; ties go to the lower frequency.

    Returns ``(pairs, missed)`` with ``pairs`` as (truth, estimate) in truth order.
    """
    cand = sorted(((abs(e - t), t, e, i, j) for i, t in enumerate(truth)
                   for j, e in enumerate(estimates)))
    used_t, used_e, pairs = set(), set(), {}
    for _, t, e, i, j in cand:
        if i in used_t or j in used_e:
            continue
        used_t.add(i)
        used_e.add(j)
        pairs[i] = (t, e)
    matched = [pairs[i] for i in range(len(truth)) if i in pairs]
    missed = [t for i, t in enumerate(truth) if i not in pairs]
    return matched, missed


def estimate_frequencies(trace: Trace, cal: CalibrationModel, detect: DetectParams = DetectParams(),
                         sweep: SweepConfig = SweepConfig(),
                         truth: Sequence[float] | None = None) -> MeasurementReport:
    pulses = detect_pulses(trace, **detect.kwargs())
    first, _, signals = identify_reference(pulses, sweep)
    est = tuple(float(cal(p.center - first.center)) for p in signals)
    if truth is None:
        return MeasurementReport(est, calibration=cal, pulse_count=len(pulses))
    truth = tuple(float(t) for t in truth)
    matched, missed = match_truth(est, truth)
    errors = tuple(e - t for t, e in matched)
    return MeasurementReport(
        estimated=est, truth=truth, errors=errors,
        rmse=rmse(errors) if errors else None,
        max_abs_error=max(abs(e) for e in errors) if errors else None,
        misses=tuple(missed), calibration=cal, pulse_count=len(pulses))


@dataclass(frozen=True)
class ResolutionPoint:
    separation: float
    signal_count: int
    errors: tuple[float, ...]
    resolved: bool


def resolution_scan(base_scn: Scenario, separations: Sequence[float],
                    detect: DetectParams = DetectParams(), cal: CalibrationModel | None = None,
                    anchor: float = 0.5e9, power_dbm: float = 4.0) -> list[ResolutionPoint]:
    """Dual-tone runs (``anchor`` and ``anchor + separation``) at each separation."""
    cal = analytic_calibration(base_scn) if cal is None else cal
    out = []
    for sep in separations:
        truth = (anchor, anchor + sep)
        scn = replace(base_scn, unknown_rf=tuple((f, power_dbm) for f in truth))
        trace = synthesize_trace(scn)
        try:
            pulses = detect_pulses(trace, **detect.kwargs())
            first, _, signals = identify_reference(pulses, scn.sweep)
        except (NoReferenceError, ReferenceMismatchError):
            out.append(ResolutionPoint(sep, 0, (), False))
            continue
        errors: tuple[float, ...] = ()
        if len(signals) == 2:
            est = sorted(cal(p.center - first.center) for p in signals)
            errors = tuple(e - t for e, t in zip(est, truth))
        ok = len(signals) == 2 and all(abs(e) < sep / 2 for e in errors)
        out.append(ResolutionPoint(float(sep), len(signals), errors, ok))
    return out


def resolution_sweep(base_scn: Scenario, separations: Sequence[float],
                     detect: DetectParams = DetectParams(), cal: CalibrationModel | None = None,
                     **kw) -> float:
    """Smallest separation resolved, scanning down from the largest.

    The scan stops at the first unresolved separation so an isolated lucky
    pass below the limit is not reported.
    """
    seps = list(separations)
    if any(b > a for a, b in zip(seps, seps[1:])):
        raise ValueError("separations must be sorted in descending order")
    best = None
    for point in resolution_scan(base_scn, seps, detect, cal, **kw):
        if not point.resolved:
            break
        best = point.separation
    if best is None:
        raise ResolutionFailureError(
            f"tones not resolved even at the largest separation {seps[0]:.6g} Hz")
    return best
