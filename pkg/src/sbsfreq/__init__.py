"""Simulation of multi-tone RF frequency measurement by Brillouin-gain frequency-to-time mapping."""

__version__ = "0.1.0"

from .brillouin import (  # noqa: E402
    BrillouinParams,
    CompositeSpectrum,
    bandwidth_3db,
    calibrate_loss_depth,
    composite_spectrum,
    net_gain_db,
)
from .estimator import (  # noqa: E402
    CalibrationModel,
    DetectParams,
    MeasurementReport,
    analytic_calibration,
    detect_pulses,
    estimate_frequencies,
    fit_calibration,
    identify_reference,
    resolution_sweep,
)
from .receiver import Trace, pulse_fwhm_time, synthesize_trace  # noqa: E402
from .spectral import OpticalTone, SsbConfig, ToneSet, cs_dsb_modulate, ssb_modulate  # noqa: E402
from .sweep import (  # noqa: E402
    NoiseModel,
    ReductionConfig,
    Scenario,
    SweepConfig,
    predicted_pulse_time,
    sweep_frequency,
)

__all__ = [
    "BrillouinParams", "CompositeSpectrum", "bandwidth_3db", "calibrate_loss_depth",
    "composite_spectrum", "net_gain_db", "CalibrationModel", "DetectParams",
    "MeasurementReport", "analytic_calibration", "detect_pulses", "estimate_frequencies", "fit_calibration",
    "identify_reference", "resolution_sweep", "Trace", "pulse_fwhm_time", "synthesize_trace",
    "OpticalTone", "SsbConfig", "ToneSet", "cs_dsb_modulate", "ssb_modulate", "NoiseModel",
    "ReductionConfig", "Scenario", "SweepConfig", "predicted_pulse_time", "sweep_frequency",
]
