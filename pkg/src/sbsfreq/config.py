"""Scenario configuration files.

The file format is TOML: ``key = value`` lines grouped in ``[section]``
tables, with the unknown tones either as an inline array of
``[frequency_hz, power_dbm]`` pairs or as ``[[unknowns]]`` array sections.
Every accepted key is listed in ``KEYS``; anything else is rejected.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .brillouin import BrillouinParams
from .errors import ConfigError, InvalidInputError
from .estimator import DetectParams
from .spectral import SsbConfig
from .sweep import NoiseModel, ProbeConfig, ReductionConfig, Scenario, SweepConfig

#: white noise on detected power used by every preset. Sized so the weakest
#: preset pulses (four tones at 1 dBm) sit ~45 sigma above the floor and the
#: shallow 9 MHz valley of the reduced-bandwidth resolution run still clears
#: the detector's 8 sigma prominence gate.
PRESET_NOISE_SIGMA_W = 2e-5
PRESET_BASELINE_W = 5e-5
#: hold at the 11 GHz band switch; sets the calibration intercept near -81 MHz
PRESET_DEAD_TIME_S = 5e-3


@dataclass(frozen=True)
class Key:
    type: Callable[[Any], Any]
    default: Any
    help: str


def _float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError(f"expected a number, got {v!r}")
    return float(v)


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"expected an integer, got {v!r}")
    return v


def _bool(v):
    if not isinstance(v, bool):
        raise TypeError(f"expected true/false, got {v!r}")
    return v


def _opt_float(v):
    return None if v in (None, "none", "auto") else _float(v)


def _pair(v):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise TypeError(f"expected a 2-element array, got {v!r}")
    return (_float(v[0]), _float(v[1]))


def _opt_pair(v):
    return None if v in (None, "none", "exact") else _pair(v)


def _str_choice(*choices):
    def conv(v):
        if v not in choices:
            raise TypeError(f"expected one of {choices}, got {v!r}")
        return v
    return conv


def _unknowns(v):
    if not isinstance(v, list):
        raise TypeError("unknowns must be an array")
    out = []
    for item in v:
        if isinstance(item, dict):
            extra = set(item) - {"frequency", "power_dbm"}
            if extra or "frequency" not in item:
                raise TypeError(f"[[unknowns]] entries take frequency and power_dbm, got {item}")
            out.append((_float(item["frequency"]), _float(item.get("power_dbm", 7.0))))
        else:
            out.append(_pair(item))
    return tuple(out)


def _float_list(v):
    if not isinstance(v, list):
        raise TypeError("expected an array of numbers")
    return tuple(_float(x) for x in v)


_D_SWEEP, _D_BRIL, _D_RED = SweepConfig(), BrillouinParams(), ReductionConfig()
_D_PROBE, _D_DET = ProbeConfig(), DetectParams()

KEYS: dict[str, Key] = {
    "seed": Key(_int, 0, "master seed; every trace seed is derived from it"),
    "sample_rate": Key(_float, 1e5, "oscilloscope sampling rate, Sa/s"),
    "carrier_hz": Key(_float, 193.08e12, "laser frequency, Hz"),
    "pump_power_dbm": Key(_float, 0.0, "pump carrier power launched into the fiber, dBm"),
    "duration": Key(_opt_float, None, "trace length in s (default: one period plus margins)"),
    "window_margin": Key(_float, 0.01, "time recorded before the first reference crossing, s"),
    "unknowns": Key(_unknowns, (), "unknown RF tones: [[f_hz, p_dbm], ...] or [[unknowns]] tables"),
    "sweep.f_start": Key(_float, _D_SWEEP.f_start, "sweep start frequency, Hz"),
    "sweep.f_stop": Key(_float, _D_SWEEP.f_stop, "sweep stop frequency, Hz"),
    "sweep.period": Key(_float, _D_SWEEP.period, "sweep period, s"),
    "sweep.switch_freq": Key(_float, _D_SWEEP.switch_freq, "band-switch frequency, Hz"),
    "sweep.switch_dead_time": Key(_float, PRESET_DEAD_TIME_S, "hold at the band switch, s"),
    "brillouin.f_sbs": Key(_float, _D_BRIL.f_sbs, "Brillouin frequency shift, Hz"),
    "brillouin.linewidth": Key(_float, _D_BRIL.linewidth, "natural gain FWHM (dB profile), Hz"),
    "brillouin.peak_gain_db_per_mw": Key(_float, _D_BRIL.peak_gain_db_per_mw,
                                         "on-resonance gain per mW of pump, dB"),
    "reduction.enabled": Key(_bool, True, "build the two flanking losses"),
    "reduction.offset": Key(_float, _D_RED.offset, "loss offset from the gain centre, Hz"),
    "reduction.target_bandwidth": Key(_float, _D_RED.target_bandwidth,
                                      "bandwidth the loss depth is solved for, Hz"),
    "reduction.loss_ratio": Key(_opt_float, None, "loss/gain depth ratio (\"auto\": solve)"),
    "reduction.pump_tones": Key(_opt_pair, _D_RED.pump_tones,
                                "two-tone pump drive, Hz (\"exact\": 2*f_sbs -+ offset)"),
    "noise.additive_sigma": Key(_float, PRESET_NOISE_SIGMA_W, "Gaussian noise std, W"),
    "noise.baseline": Key(_float, PRESET_BASELINE_W, "detector/ASE floor, W"),
    "probe.laser_power_dbm": Key(_float, _D_PROBE.laser_power_dbm, "laser power, dBm"),
    "probe.sideband_power_dbm": Key(_float, _D_PROBE.sideband_power_dbm,
                                    "CS-DSB sideband power, dBm"),
    "probe.carrier_suppression_db": Key(_float, _D_PROBE.carrier_suppression_db,
                                        "CS-DSB carrier suppression, dB"),
    "probe.rf_ref_dbm": Key(_float, _D_PROBE.rf_ref_dbm, "RF drive level for 0 dB sidebands, dBm"),
    "probe.sideband": Key(_str_choice("upper", "lower"), "upper", "SSB sideband of the unknowns"),
    "probe.residual_carrier_rel": Key(_float, 0.0, "residual carrier vs strongest sideband, dB"),
    "probe.conversion_loss": Key(_float, _D_PROBE.ssb.conversion_loss, "SSB loss per sideband, dB"),
    "probe.passband": Key(_pair, _D_PROBE.passband, "optical filter passband relative to carrier, Hz"),
    "detect.threshold_rel": Key(_float, _D_DET.threshold_rel, "detection threshold, fraction of peak"),
    "detect.min_separation": Key(_opt_float, None, "maxima merge distance, s (default 2 samples)"),
    "detect.prominence_sigma": Key(_float, _D_DET.prominence_sigma, "valley depth in noise sigmas"),
    "detect.prominence_rel": Key(_float, _D_DET.prominence_rel, "valley depth, fraction of pulse"),
    "calibration.f_start": Key(_float, 0.3e9, "first calibration tone, Hz"),
    "calibration.f_stop": Key(_float, 7.7e9, "last calibration tone, Hz"),
    "calibration.f_step": Key(_float, 0.01e9, "calibration tone step, Hz"),
    "calibration.tones": Key(_float_list, None, "explicit calibration tones, Hz (overrides the grid)"),
    "calibration.power_dbm": Key(_float, 7.0, "calibration tone power, dBm"),
}


def keys_help() -> str:
    width = max(map(len, KEYS))
    return "\n".join(f"  {k:<{width}}  {v.help} (default: {v.default!r})" for k, v in KEYS.items())


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_text(text: str, source: str = "<config>") -> dict:
    """Parse TOML text into a validated flat ``{dotted.key: value}`` dict."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return validate(_flatten(raw), source)


def validate(flat: dict, source: str = "<config>") -> dict:
    out = {}
    for key, value in flat.items():
        if key not in KEYS:
            raise ConfigError(f"{source}: unknown key {key!r} (see --help for accepted keys)")
        try:
            out[key] = KEYS[key].type(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: key {key!r}: {exc}") from None
    return out


def parse_override(item: str) -> tuple[str, Any]:
    """``key=value`` with a TOML value; bare words fall back to strings."""
    key, sep, value = item.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    try:
        parsed = tomllib.loads(f"v = {value.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value.strip()
    return key, parsed


def load_settings(path: str | Path | None = None, overrides: list[str] | dict | None = None,
                  base: dict | None = None) -> dict:
    """Merged settings: key defaults < ``base`` < file < overrides."""
    settings = {k: v.default for k, v in KEYS.items()}
    if base:
        settings.update(validate(base, "<preset>"))
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from None
        settings.update(parse_text(text, str(p)))
    if overrides:
        pairs = overrides.items() if isinstance(overrides, dict) else map(parse_override, overrides)
        settings.update(validate(dict(pairs), "--set"))
    return settings


def scenario_from_settings(s: dict) -> Scenario:
    try:
        return Scenario(
            sweep=SweepConfig(s["sweep.f_start"], s["sweep.f_stop"], s["sweep.period"],
                              s["sweep.switch_freq"], s["sweep.switch_dead_time"]),
            brillouin=BrillouinParams(s["brillouin.f_sbs"], s["brillouin.linewidth"],
                                      s["brillouin.peak_gain_db_per_mw"]),
            unknown_rf=s["unknowns"],
            reduction=ReductionConfig(s["reduction.enabled"], s["reduction.offset"],
                                      s["reduction.target_bandwidth"], s["reduction.loss_ratio"],
                                      s["reduction.pump_tones"]),
            noise=NoiseModel(s["noise.additive_sigma"], s["noise.baseline"]),
            duration=s["duration"],
            seed=s["seed"],
            sample_rate=s["sample_rate"],
            carrier_hz=s["carrier_hz"],
            pump_power_dbm=s["pump_power_dbm"],
            probe=ProbeConfig(
                laser_power_dbm=s["probe.laser_power_dbm"],
                sideband_power_dbm=s["probe.sideband_power_dbm"],
                carrier_suppression_db=s["probe.carrier_suppression_db"],
                ssb=SsbConfig(s["probe.sideband"], s["probe.residual_carrier_rel"],
                              s["probe.conversion_loss"]),
                rf_ref_dbm=s["probe.rf_ref_dbm"],
                passband=s["probe.passband"],
            ),
            window_margin=s["window_margin"],
        )
    except InvalidInputError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from None


def detect_from_settings(s: dict) -> DetectParams:
    try:
        return DetectParams(s["detect.threshold_rel"], s["detect.min_separation"],
                            s["detect.prominence_sigma"], s["detect.prominence_rel"])
    except ValueError as exc:
        raise ConfigError(f"invalid detection settings: {exc}") from None


def calibration_tones(s: dict) -> tuple[float, ...]:
    if s["calibration.tones"] is not None:
        return tuple(s["calibration.tones"])
    # floor with a small tolerance so the grid never runs past f_stop
    n = math.floor((s["calibration.f_stop"] - s["calibration.f_start"]) / s["calibration.f_step"] + 1e-9)
    # integer steps keep the grid exact (0.3 + k * 0.01 GHz)
    return tuple(round(s["calibration.f_start"] + k * s["calibration.f_step"]) * 1.0
                 for k in range(n + 1))
