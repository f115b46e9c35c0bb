"""Named experiment presets and the runner that persists their artifacts.

Every preset starts from the documented key defaults in :mod:`sbsfreq.config`
(5 ms band-switch hold, 20 uW detector noise) and accepts overrides, which
are recorded in the run manifest. All trace seeds derive from the single
``seed`` setting.

Tone plans:

* ``single_sweep``: 741 tones from 0.3 to 7.7 GHz in 10 MHz steps, measured
  in three passes. Pass 1 fits the calibration, passes 2 and 3 are scored.
* ``dual``: a fixed 0.5 GHz tone plus a partner swept 0.4 to 7.6 GHz in
  0.2 GHz steps, both at 4 dBm.
* ``four_tone``: fixed 0.5, 1.5 and 2.5 GHz plus a partner swept from 0.4 GHz,
  all at 1 dBm. The partner starts at 0.4 GHz like the dual preset; 0.2 GHz
  would lie below the 0.208 GHz lower edge of the measurable band.
* ``resolution``: two 4 dBm tones at 0.5 GHz and 0.5 GHz + d for d from 20 to
  2 MHz, with and without bandwidth reduction, plus single-tone pulse widths.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .brillouin import NATURAL_LINEWIDTH_HZ, REDUCED_BANDWIDTH_HZ, bandwidth_3db
from .config import (
    calibration_tones,
    detect_from_settings,
    load_settings,
    scenario_from_settings,
)
from .errors import (
    ConfigError,
    DegenerateFitError,
    NoPulseError,
    NoReferenceError,
    ReferenceMismatchError,
)
from .estimator import (
    CalibrationModel,
    DetectParams,
    analytic_calibration,
    detect_pulses,
    estimate_frequencies,
    fit_calibration,
    identify_reference,
    match_truth,
    rmse,
)
from .receiver import pulse_fwhm_time, synthesize_trace, write_trace_csv
from .sweep import Scenario, predicted_pulse_time

EXPERIMENTS = ("spectrum", "single_sweep", "dual", "four_tone", "resolution", "custom")

GHZ = 1e9
MHZ = 1e6
SCORED_PASSES = (2, 3)
DUAL_FIXED_HZ = (0.5 * GHZ,)
FOUR_TONE_FIXED_HZ = (0.5 * GHZ, 1.5 * GHZ, 2.5 * GHZ)
#: swept partner for the dual and four-tone presets, 0.4 to 7.6 GHz
PARTNER_SWEEP_HZ = tuple((400 + 200 * k) * MHZ for k in range(37))
DUAL_POWER_DBM = 4.0
FOUR_TONE_POWER_DBM = 1.0
RESOLUTION_ANCHOR_HZ = 0.5 * GHZ
RESOLUTION_POWER_DBM = 4.0
RESOLUTION_SEPARATIONS_HZ = tuple(float(d) * MHZ for d in range(20, 1, -1))
#: partners around the anchor for the small-separation error plot (anchor itself excluded)
RESOLUTION_PARTNERS_HZ = tuple((450 + 10 * k) * MHZ for k in range(11) if k != 5)
SPECTRUM_SPAN_HZ = 100 * MHZ
SPECTRUM_STEP_HZ = 50e3

# acceptance thresholds checked under --check
RMSE_LIMIT_HZ = 1 * MHZ
MAX_ERROR_LIMIT_HZ = 2.1 * MHZ
SLOPE_REL_TOL = 1e-3
FWHM_TOL_HZ = 0.1 * MHZ
WIDTH_REL_TOL = 0.15
RESOLUTION_LIMIT_HZ = 10 * MHZ

_SEED_STREAMS = {"calibration": 0, "single_sweep": 1, "dual": 2, "four_tone": 3, "resolution": 4}


def derive_seed(master: int, *key: int) -> int:
    """Independent per-trace seed from the master seed and an integer key path."""
    ss = np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    output_dir: Path
    overrides: dict = field(default_factory=dict)
    config_path: Path | None = None
    formats: frozenset = frozenset({"csv", "json"})
    check: bool = False
    workers: int = 1
    calibration_path: Path | None = None
    figures: bool = True

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        bad = set(self.formats) - {"csv", "json"}
        if bad:
            raise ConfigError(f"unknown output format(s) {sorted(bad)}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        object.__setattr__(self, "output_dir", Path(self.output_dir))

    def settings(self) -> dict:
        return load_settings(self.config_path, self.overrides)

    def digest(self) -> str:
        blob = json.dumps({"name": self.name, "settings": _jsonable(self.settings())},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class RunManifest:
    experiment: str
    spec_digest: str
    seed: int
    started: str
    finished: str = ""
    files: list[str] = field(default_factory=list)
    version: str = __version__
    overrides: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return _jsonable(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


class _Writer:
    """Collects the files written for the manifest; honours the format set."""

    def __init__(self, root: Path, formats):
        self.root = root
        self.formats = set(formats)
        self.files: list[str] = []

    def path(self, rel: str) -> Path:
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def _record(self, p: Path):
        rel = p.relative_to(self.root).as_posix()
        if rel not in self.files:
            self.files.append(rel)

    def json(self, rel: str, obj) -> None:
        if "json" in self.formats:
            p = self.path(rel)
            p.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
            self._record(p)

    def text(self, rel: str, text: str, kind: str) -> None:
        if kind in self.formats:
            p = self.path(rel)
            p.write_text(text)
            self._record(p)

    def csv(self, rel: str, header: Sequence[str], rows) -> None:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        self.text(rel, "\n".join(lines) + "\n", "csv")

    def trace(self, rel: str, trace) -> None:
        if "csv" in self.formats:
            p = self.path(rel)
            write_trace_csv(trace, p)
            self._record(p)

    def figure(self, rel: str, render: Callable[[Path], None]) -> None:
        p = self.path(rel)
        render(p)
        self._record(p)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


# --- per-trace work, picklable for the process pool ---------------------------

@dataclass(frozen=True)
class TraceOutcome:
    pulse_count: int
    signal_times: tuple[float, ...]  # s, relative to the first reference pulse
    error: str | None = None


def measure_trace(job: tuple[Scenario, DetectParams]) -> TraceOutcome:
    scn, detect = job
    pulses = detect_pulses(synthesize_trace(scn), **detect.kwargs())
    try:
        first, _, signals = identify_reference(pulses, scn.sweep)
    except (NoReferenceError, ReferenceMismatchError) as exc:
        return TraceOutcome(len(pulses), (), str(exc))
    return TraceOutcome(len(pulses), tuple(p.center - first.center for p in signals))


def _map(fn, jobs, workers: int) -> list:
    """Ordered map; results follow job order regardless of completion order."""
    if workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(len(jobs) // (4 * workers), 1)))


def _with_tones(scn: Scenario, tones, seed: int) -> Scenario:
    return replace(scn, unknown_rf=tuple(tones), seed=seed)


def run_calibration(base: Scenario, detect: DetectParams, tones: Sequence[float],
                    power_dbm: float, workers: int = 1):
    """First-measurement pass: one trace per tone, then a straight-line fit.

    Returns ``(model, points, outcomes)``; ``points`` are (t_rel, f) pairs from
    traces with exactly one signal pulse.
    """
    jobs = [(_with_tones(base, [(f, power_dbm)], derive_seed(base.seed, 0, 1, i)), detect)
            for i, f in enumerate(tones)]
    outcomes = _map(measure_trace, jobs, workers)
    points = [(o.signal_times[0], f) for o, f in zip(outcomes, tones) if len(o.signal_times) == 1]
    if len(points) < 2:
        raise DegenerateFitError(
            f"only {len(points)} calibration tone(s) produced a single clean pulse; need 2")
    return fit_calibration(points), points, outcomes


@dataclass
class LineStats:
    """Errors collected for one tone role (e.g. the fixed or the swept line)."""

    label: str
    truth: list[float] = field(default_factory=list)
    errors: list[float] = field(default_factory=list)
    misses: list[float] = field(default_factory=list)

    def summary(self) -> dict:
        e = self.errors
        return {"line": self.label, "n": len(e), "misses": len(self.misses),
                "rmse_hz": rmse(e) if e else None,
                "max_abs_error_hz": max(map(abs, e)) if e else None}


def _score(outcomes: Sequence[TraceOutcome], truths: Sequence[Sequence[float]],
           labels: Sequence[str], cal: CalibrationModel):
    """Per-line error statistics plus the traces whose pulse count is wrong."""
    lines = [LineStats(lab) for lab in labels]
    bad_counts = []
    for i, (o, truth) in enumerate(zip(outcomes, truths)):
        if o.pulse_count != len(truth) + 2 or o.error:
            bad_counts.append(i)
        est = [float(cal(t)) for t in o.signal_times]
        matched, _ = match_truth(est, truth)
        got = dict(matched)
        for line, f in zip(lines, truth):
            if f in got:
                line.truth.append(f)
                line.errors.append(got[f] - f)
            else:
                line.misses.append(f)
    return lines, bad_counts


def _line_checks(prefix: str, lines: Sequence[LineStats], bad_counts, n_traces, n_tones) -> list[Check]:
    checks = [Check(f"{prefix}pulse_count", not bad_counts,
                    f"{n_traces - len(bad_counts)}/{n_traces} traces with {n_tones + 2} pulses")]
    for line in lines:
        s = line.summary()
        ok = s["rmse_hz"] is not None and 0 < s["rmse_hz"] < RMSE_LIMIT_HZ and not line.misses
        checks.append(Check(f"{prefix}rmse[{line.label}]", ok,
                            f"rmse={_mhz(s['rmse_hz'])} MHz, misses={len(line.misses)}"))
    return checks


def _mhz(v) -> str:
    return "n/a" if v is None else f"{v / MHZ:.4f}"


def _error_rows(lines: Sequence[LineStats], series_prefix: str = ""):
    for line in lines:
        for f, e in zip(line.truth, line.errors):
            yield (f, e, f"{series_prefix}{line.label}")


def _export_trace(w: _Writer, stem: str, scn: Scenario, cal: CalibrationModel,
                  detect: DetectParams, truth) -> None:
    """Persist one trace and its in-process report (reproducible by ``analyze``)."""
    trace = synthesize_trace(scn)
    w.trace(f"traces/{stem}.csv", trace)
    report = estimate_frequencies(trace, cal, detect, scn.sweep, truth)
    w.text(f"traces/{stem}_report.json", report.to_json(), "json")


def _ghz_tag(f: float) -> str:
    return f"{f / GHZ:.2f}".replace(".", "p") + "GHz"


# --- experiments ---------------------------------------------------------------

def _gain_window(scn: Scenario) -> tuple[float, float]:
    centre = scn.carrier_hz - scn.brillouin.f_sbs
    half = scn.reduction.offset + 3 * scn.brillouin.linewidth
    return centre - half, centre + half


def _exp_spectrum(spec, s, scn, detect, w, plot):
    centre = scn.carrier_hz - scn.brillouin.f_sbs
    n = int(round(SPECTRUM_SPAN_HZ / SPECTRUM_STEP_HZ))
    detuning = np.arange(-n, n + 1) * SPECTRUM_STEP_HZ
    modes = {"reduced": replace(scn, reduction=replace(scn.reduction, enabled=True)),
             "unreduced": replace(scn, reduction=replace(scn.reduction, enabled=False))}
    summary, curves = {}, {}
    for mode, m_scn in modes.items():
        peak, fwhm = bandwidth_3db(m_scn.spectrum, _gain_window(m_scn))
        g = m_scn.spectrum(centre + detuning)
        curves[mode] = g
        summary[mode] = {"fwhm_hz": fwhm, "peak_detuning_hz": peak - centre,
                         "peak_gain_db": float(m_scn.spectrum(peak)),
                         "loss_ratio": m_scn.loss_ratio}
    w.csv("spectrum.csv", ("detuning_hz", "gain_db", "series"),
          ((float(x), float(y), mode) for mode, g in curves.items() for x, y in zip(detuning, g)))
    w.json("spectrum.json", summary)
    if plot:
        w.figure("figures/spectrum.png", lambda p: plot.spectrum(p, detuning, curves, summary))
    targets = {"reduced": REDUCED_BANDWIDTH_HZ, "unreduced": NATURAL_LINEWIDTH_HZ}
    return [Check(f"fwhm[{mode}]", abs(summary[mode]["fwhm_hz"] - tgt) <= FWHM_TOL_HZ,
                  f"{summary[mode]['fwhm_hz'] / MHZ:.4f} MHz vs {tgt / MHZ:.4f} MHz")
            for mode, tgt in targets.items()]


def _calibrate_for(spec, s, scn, detect, w, plot):
    if spec.calibration_path is not None:
        try:
            text = Path(spec.calibration_path).read_text()
        except OSError as exc:
            raise ConfigError(f"{spec.calibration_path}: cannot read calibration ({exc.strerror})")
        cal = CalibrationModel.from_json(text)
        return cal, []
    tones = calibration_tones(s)
    cal, points, _ = run_calibration(scn, detect, tones, s["calibration.power_dbm"], spec.workers)
    w.json("calibration.json", {"calibration": cal.to_dict(), "n_points": len(points),
                                "n_tones": len(tones)})
    w.csv("calibration_points.csv", ("t_rel_s", "f_hz"), points)
    if plot:
        w.figure("figures/calibration.png", lambda p: plot.calibration(p, points, cal))
    bound = cal.slope / scn.sample_rate
    rate = scn.sweep.rate
    return cal, [
        Check("calibration_slope", abs(cal.slope / rate - 1) <= SLOPE_REL_TOL,
              f"slope={cal.slope:.6e} Hz/s vs rate {rate:.6e} Hz/s"),
        Check("calibration_residual", cal.residual_rms < bound,
              f"residual_rms={cal.residual_rms / MHZ:.4f} MHz vs bound {bound / MHZ:.4f} MHz"),
    ]


def _exp_single_sweep(spec, s, scn, detect, w, plot):
    cal, checks = _calibrate_for(spec, s, scn, detect, w, plot)
    tones = calibration_tones(s)
    power = s["calibration.power_dbm"]
    all_lines = []
    for p in SCORED_PASSES:
        jobs = [(_with_tones(scn, [(f, power)], derive_seed(scn.seed, 1, p, i)), detect)
                for i, f in enumerate(tones)]
        outcomes = _map(measure_trace, jobs, spec.workers)
        lines, bad = _score(outcomes, [(f,) for f in tones], [f"pass{p}"], cal)
        all_lines += lines
        line = lines[0]
        summary = line.summary()
        w.json(f"report_pass{p}.json", {
            "pass": p, "calibration": cal.to_dict(), "truth_hz": line.truth,
            "errors_hz": line.errors, "rmse_hz": summary["rmse_hz"],
            "max_abs_error_hz": summary["max_abs_error_hz"], "misses_hz": line.misses,
            "bad_pulse_count_traces": bad})
        checks += _line_checks(f"pass{p}_", lines, bad, len(tones), 1)
        mx = summary["max_abs_error_hz"]
        checks.append(Check(f"pass{p}_max_error", mx is not None and mx <= MAX_ERROR_LIMIT_HZ,
                            f"max |error| = {_mhz(mx)} MHz"))
    w.csv("errors.csv", ("f_hz", "error_hz", "series"), _error_rows(all_lines))
    if plot:
        w.figure("figures/errors.png", lambda p: plot.errors(p, all_lines, "single tone"))
    f_exp = RESOLUTION_ANCHOR_HZ
    i_exp = int(np.argmin(np.abs(np.asarray(tones) - f_exp)))
    scn_exp = _with_tones(scn, [(tones[i_exp], power)], derive_seed(scn.seed, 1, SCORED_PASSES[0], i_exp))
    _export_trace(w, f"single_{_ghz_tag(tones[i_exp])}_pass{SCORED_PASSES[0]}", scn_exp, cal,
                  detect, (tones[i_exp],))
    return checks


def _multi_tone(spec, s, scn, detect, w, plot, stream, fixed, power, label):
    cal, checks = _calibrate_for(spec, s, scn, detect, w, plot)
    truths = [tuple(fixed) + (f,) for f in PARTNER_SWEEP_HZ]
    labels = [f"fixed_{_ghz_tag(f)}" for f in fixed] + ["swept"]
    jobs = [(_with_tones(scn, [(f, power) for f in truth], derive_seed(scn.seed, stream, 1, i)), detect)
            for i, truth in enumerate(truths)]
    outcomes = _map(measure_trace, jobs, spec.workers)
    lines, bad = _score(outcomes, truths, labels, cal)
    w.csv("errors.csv", ("f_hz", "error_hz", "series"), _error_rows(lines))
    w.csv("pulse_counts.csv", ("swept_hz", "pulse_count"),
          ((t[-1], o.pulse_count) for t, o in zip(truths, outcomes)))
    w.json("report.json", {"calibration": cal.to_dict(), "lines": [ln.summary() for ln in lines],
                           "bad_pulse_count_traces": bad, "power_dbm": power})
    if plot:
        w.figure("figures/errors.png", lambda p: plot.errors(p, lines, label))
    i_exp = len(truths) // 2
    _export_trace(w, f"{label}_{_ghz_tag(truths[i_exp][-1])}",
                  jobs[i_exp][0], cal, detect, truths[i_exp])
    return checks + _line_checks("", lines, bad, len(truths), len(fixed) + 1)


def _exp_dual(spec, s, scn, detect, w, plot):
    return _multi_tone(spec, s, scn, detect, w, plot, _SEED_STREAMS["dual"],
                       DUAL_FIXED_HZ, DUAL_POWER_DBM, "dual")


def _exp_four_tone(spec, s, scn, detect, w, plot):
    return _multi_tone(spec, s, scn, detect, w, plot, _SEED_STREAMS["four_tone"],
                       FOUR_TONE_FIXED_HZ, FOUR_TONE_POWER_DBM, "four_tone")


def resolution_limit(points) -> float | None:
    """Smallest separation in the run of resolved points from the largest down."""
    best = None
    for sep, ok in points:
        if not ok:
            break
        best = sep
    return best


def _exp_resolution(spec, s, scn, detect, w, plot):
    stream = _SEED_STREAMS["resolution"]
    cal = analytic_calibration(scn)
    rows, limits, traces = [], {}, {}
    for m, enabled in enumerate((True, False)):
        mode = "reduced" if enabled else "unreduced"
        m_scn = replace(scn, reduction=replace(scn.reduction, enabled=enabled))
        truths = [(RESOLUTION_ANCHOR_HZ, RESOLUTION_ANCHOR_HZ + d) for d in RESOLUTION_SEPARATIONS_HZ]
        jobs = [(_with_tones(m_scn, [(f, RESOLUTION_POWER_DBM) for f in t],
                             derive_seed(scn.seed, stream, m, i)), detect)
                for i, t in enumerate(truths)]
        outcomes = _map(measure_trace, jobs, spec.workers)
        pts = []
        for d, t, o in zip(RESOLUTION_SEPARATIONS_HZ, truths, outcomes):
            est = sorted(float(cal(x)) for x in o.signal_times)
            errs = [e - f for e, f in zip(est, t)] if len(est) == 2 else []
            ok = len(est) == 2 and all(abs(e) < d / 2 for e in errs)
            pts.append((d, ok))
            rows.append((d, mode, len(est), ok, *(errs or [None, None])))
        limits[mode] = resolution_limit(pts)
        i10 = RESOLUTION_SEPARATIONS_HZ.index(RESOLUTION_LIMIT_HZ)
        traces[mode] = synthesize_trace(jobs[i10][0])
        w.trace(f"traces/{mode}_10MHz.csv", traces[mode])

    w.csv("resolution_scan.csv",
          ("separation_hz", "series", "signal_count", "resolved", "error_low_hz", "error_high_hz"), rows)

    # partner sweep around the anchor in reduced mode
    partner_rows = []
    red = replace(scn, reduction=replace(scn.reduction, enabled=True))
    for i, f in enumerate(RESOLUTION_PARTNERS_HZ):
        truth = (RESOLUTION_ANCHOR_HZ, f)
        o = measure_trace((_with_tones(red, [(x, RESOLUTION_POWER_DBM) for x in truth],
                                       derive_seed(scn.seed, stream, 2, i)), detect))
        matched, _ = match_truth([float(cal(x)) for x in o.signal_times], truth)
        for t, e in matched:
            partner_rows.append((f, e - t, "fixed" if t == RESOLUTION_ANCHOR_HZ else "partner"))
    w.csv("partner_errors.csv", ("partner_hz", "error_hz", "series"), partner_rows)

    widths = pulse_width_comparison(scn, derive_seed(scn.seed, stream, 3, 0))
    w.json("resolution.json", {"limit_hz": limits, "separations_hz": RESOLUTION_SEPARATIONS_HZ,
                               "pulse_widths": widths})
    if plot:
        w.figure("figures/resolution.png", lambda p: plot.resolution(p, rows, limits))
        w.figure("figures/traces_10MHz.png", lambda p: plot.trace_pair(
            p, traces, predicted_pulse_time(RESOLUTION_ANCHOR_HZ, scn.sweep, scn.brillouin)))

    red_lim, unred_lim = limits["reduced"], limits["unreduced"]
    checks = [
        Check("resolution_reduced", red_lim is not None and red_lim < RESOLUTION_LIMIT_HZ,
              f"reduced limit = {_mhz(red_lim)} MHz"),
        Check("resolution_ordering", red_lim is not None and
              (unred_lim is None or unred_lim > red_lim),
              f"unreduced limit = {_mhz(unred_lim)} MHz"),
        Check("resolution_unreduced_borderline", unred_lim is not None and
              RESOLUTION_LIMIT_HZ <= unred_lim <= 1.2 * RESOLUTION_LIMIT_HZ,
              f"unreduced limit = {_mhz(unred_lim)} MHz"),
    ]
    checks.append(Check("pulse_width_ordering",
                        widths["reduced"]["fwhm_s"] < widths["unreduced"]["fwhm_s"],
                        f"{widths['reduced']['fwhm_s']:.4e} s vs {widths['unreduced']['fwhm_s']:.4e} s"))
    for mode in ("reduced", "unreduced"):
        rel = widths[mode]["fwhm_s"] / widths[mode]["predicted_s"] - 1
        checks.append(Check(f"pulse_width[{mode}]", abs(rel) <= WIDTH_REL_TOL,
                            f"{widths[mode]['fwhm_s']:.4e} s vs bandwidth/rate "
                            f"{widths[mode]['predicted_s']:.4e} s ({100 * rel:+.1f}%)"))
    return checks


def pulse_width_comparison(scn: Scenario, seed: int, f: float = RESOLUTION_ANCHOR_HZ,
                           power_dbm: float = RESOLUTION_POWER_DBM) -> dict:
    """Pulse FWHM of a single tone with and without reduction vs bandwidth/rate."""
    out = {}
    t_pulse = predicted_pulse_time(f, scn.sweep, scn.brillouin)
    for mode, enabled in (("reduced", True), ("unreduced", False)):
        m_scn = replace(scn, reduction=replace(scn.reduction, enabled=enabled),
                        unknown_rf=((f, power_dbm),), seed=seed)
        _, bw = bandwidth_3db(m_scn.spectrum, _gain_window(m_scn))
        try:
            width = pulse_fwhm_time(synthesize_trace(m_scn), t_pulse)
        except NoPulseError:
            width = math.nan
        out[mode] = {"fwhm_s": width, "bandwidth_hz": bw, "predicted_s": bw / m_scn.sweep.rate}
    return out


def _exp_custom(spec, s, scn, detect, w, plot):
    if spec.calibration_path is not None:
        cal, checks = _calibrate_for(spec, s, scn, detect, w, plot)
    else:
        cal, checks = analytic_calibration(scn), []
        w.text("calibration.json", cal.to_json(), "json")
    truth = tuple(f for f, _ in scn.unknown_rf)
    trace = synthesize_trace(scn)
    w.trace("trace.csv", trace)
    report = estimate_frequencies(trace, cal, detect, scn.sweep, truth or None)
    w.text("report.json", report.to_json(), "json")
    if plot:
        w.figure("figures/trace.png", lambda p: plot.trace(p, trace))
    if truth:
        checks.append(Check("pulse_count", report.pulse_count == len(truth) + 2,
                            f"{report.pulse_count} pulses for {len(truth)} tones"))
    return checks


_RUNNERS = {
    "spectrum": _exp_spectrum,
    "single_sweep": _exp_single_sweep,
    "dual": _exp_dual,
    "four_tone": _exp_four_tone,
    "resolution": _exp_resolution,
    "custom": _exp_custom,
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_experiment(spec: ExperimentSpec) -> RunManifest:
    """Run a preset, write its artifacts under ``spec.output_dir`` and a manifest."""
    settings = spec.settings()
    scn = scenario_from_settings(settings)
    detect = detect_from_settings(settings)
    manifest = RunManifest(spec.name, spec.digest(), settings["seed"], _now(),
                           overrides=dict(spec.overrides))
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    w = _Writer(spec.output_dir, spec.formats)
    w.json("settings.json", settings)
    plot = None
    if spec.figures:
        from . import plotting as plot
    manifest.checks = _RUNNERS[spec.name](spec, settings, scn, detect, w, plot)
    manifest.files = sorted(w.files)
    manifest.finished = _now()
    (spec.output_dir / "manifest.json").write_text(manifest.to_json())
    return manifest
