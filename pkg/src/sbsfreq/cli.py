"""Command-line entry point: ``sbsfreq <command> [options]``.

Exit codes: 0 success, 2 configuration or input error, 3 acceptance check
failed, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .brillouin import bandwidth_3db, spectrum_to_csv
from .config import (
    calibration_tones,
    detect_from_settings,
    keys_help,
    load_settings,
    parse_override,
    scenario_from_settings,
)
from .errors import SBSError
from .estimator import CalibrationModel, estimate_frequencies
from .experiments import EXPERIMENTS, ExperimentSpec, run_calibration, run_experiment
from .receiver import read_trace_csv, synthesize_trace, write_trace_csv

OUTPUT_ROOT_ENV = "SBSFREQ_OUTPUT_ROOT"
EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("sbsfreq")


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


_DETECT_FLAGS = (("threshold_rel", "detect.threshold_rel"),
                 ("min_separation", "detect.min_separation"),
                 ("prominence_sigma", "detect.prominence_sigma"),
                 ("prominence_rel", "detect.prominence_rel"))


def _overrides(args) -> dict:
    overrides = dict(parse_override(item) for item in (args.set or []))
    for flag, key in _DETECT_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _settings(args) -> dict:
    return load_settings(args.config, _overrides(args))


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        log.info("wrote %s", out)


def cmd_spectrum(args) -> int:
    scn = scenario_from_settings(_settings(args))
    centre = scn.carrier_hz - scn.brillouin.f_sbs
    n = int(round(args.span / args.step))
    grid = centre + np.arange(-n, n + 1) * args.step
    half = scn.reduction.offset + 3 * scn.brillouin.linewidth
    peak, fwhm = bandwidth_3db(scn.spectrum, (centre - half, centre + half))
    _emit(spectrum_to_csv(scn.spectrum, grid), args.out)
    print(f"peak_hz={peak!r} fwhm_hz={fwhm!r} loss_ratio={scn.loss_ratio!r}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scn = scenario_from_settings(_settings(args))
    out = args.out or output_root() / "trace.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace_csv(synthesize_trace(scn), out)
    print(f"wrote {out} ({scn.n_samples} samples, digest {scn.digest()})", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    settings = _settings(args)
    scn = scenario_from_settings(settings)
    trace = read_trace_csv(args.trace)
    cal = CalibrationModel.from_json(args.calibration.read_text())
    truth = args.truth if args.truth else None
    report = estimate_frequencies(trace, cal, detect_from_settings(settings), scn.sweep, truth)
    _emit(report.to_json(), args.out)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    settings = _settings(args)
    scn = scenario_from_settings(settings)
    cal, points, _ = run_calibration(scn, detect_from_settings(settings), calibration_tones(settings),
                                     settings["calibration.power_dbm"], args.workers)
    _emit(cal.to_json(), args.out or output_root() / "calibration.json")
    print(f"slope_hz_per_s={cal.slope!r} intercept_hz={cal.intercept!r} "
          f"residual_rms_hz={cal.residual_rms!r} points={len(points)}")
    return EXIT_OK


def cmd_run(args) -> int:
    spec = ExperimentSpec(
        name=args.experiment,
        output_dir=args.out or output_root() / args.experiment,
        overrides=_overrides(args),
        config_path=args.config,
        formats=frozenset(f.strip() for f in args.formats.split(",") if f.strip()),
        check=args.check,
        workers=args.workers,
        calibration_path=args.calibration,
        figures=not args.no_figures,
    )
    manifest = run_experiment(spec)
    for c in manifest.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    print(f"wrote {len(manifest.files)} files to {spec.output_dir}")
    if args.check and not manifest.passed:
        return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    epilog = "config keys (TOML file via --config, or --set key=value):\n" + keys_help()
    fmt = argparse.RawDescriptionHelpFormatter

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario TOML file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    detect = argparse.ArgumentParser(add_help=False)
    detect.add_argument("--threshold-rel", type=float, help="detection threshold (fraction of peak)")
    detect.add_argument("--min-separation", type=float, help="merge distance for maxima, s")
    detect.add_argument("--prominence-sigma", type=float, help="valley depth in noise sigmas")
    detect.add_argument("--prominence-rel", type=float, help="valley depth, fraction of pulse")

    p = argparse.ArgumentParser(prog="sbsfreq", description="Brillouin frequency-to-time mapping simulator.",
                                epilog=epilog, formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], epilog=epilog, formatter_class=fmt,
                       help="write the composite gain spectrum around the gain centre as CSV")
    s.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    s.add_argument("--span", type=float, default=100e6, help="half span around the centre, Hz")
    s.add_argument("--step", type=float, default=50e3, help="grid step, Hz")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("simulate", parents=[common], epilog=epilog, formatter_class=fmt,
                       help="synthesize one photodetector trace")
    s.add_argument("--out", type=Path, help=f"trace CSV path (default: ${OUTPUT_ROOT_ENV}/trace.csv)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("analyze", parents=[common, detect], epilog=epilog, formatter_class=fmt,
                       help="estimate frequencies from a trace CSV and a calibration JSON")
    s.add_argument("trace", type=Path)
    s.add_argument("calibration", type=Path)
    s.add_argument("--truth", type=float, nargs="+", help="true frequencies for scoring, Hz")
    s.add_argument("--out", type=Path, help="report JSON path (default: stdout)")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("calibrate", parents=[common, detect], epilog=epilog, formatter_class=fmt,
                       help="run the first-measurement sweep and fit the time-frequency line")
    s.add_argument("--out", type=Path,
                   help=f"calibration JSON path (default: ${OUTPUT_ROOT_ENV}/calibration.json)")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("run", parents=[common, detect], epilog=epilog, formatter_class=fmt,
                       help="run a named experiment preset")
    s.add_argument("experiment", choices=EXPERIMENTS)
    s.add_argument("--check", action="store_true", help="exit 3 when an acceptance check fails")
    s.add_argument("--out", type=Path, help=f"output directory (default: ${OUTPUT_ROOT_ENV}/<experiment>)")
    s.add_argument("--workers", type=int, default=1, help="worker processes for per-trace runs")
    s.add_argument("--calibration", type=Path, help="reuse a calibration JSON instead of fitting one")
    s.add_argument("--formats", default="csv,json", help="comma-separated subset of csv,json")
    s.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    s.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SBSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
