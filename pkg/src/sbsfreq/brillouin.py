"""Small-signal Brillouin gain/loss spectra built from a pump tone set.

Each pump tone at ``f_p`` writes a Lorentzian gain line at ``f_p - f_sbs`` and
an equal-depth loss line at ``f_p + f_sbs``. Lines add in dB, i.e. the probe
sees the product of the individual exponential gains.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import InfeasibleError, InvalidInputError, NoPeakError, WindowTooSmallError
from .spectral import ToneSet

F_SBS_HZ = 10.792e9
NATURAL_LINEWIDTH_HZ = 21.6e6
REDUCED_BANDWIDTH_HZ = 10.3e6
LOSS_OFFSET_HZ = 14.5e6
#: unreduced on-resonance gain is 15 dB at the 0 dBm pump launch level
DEFAULT_PEAK_GAIN_DB_PER_MW = 15.0

_CROSSING_TOL_HZ = 1.0
_GRID_POINTS = 4001


@dataclass(frozen=True)
class BrillouinParams:
    f_sbs: float = F_SBS_HZ
    linewidth: float = NATURAL_LINEWIDTH_HZ  # FWHM of the dB gain profile
    peak_gain_db_per_mw: float = DEFAULT_PEAK_GAIN_DB_PER_MW

    def __post_init__(self):
        for name in ("f_sbs", "linewidth", "peak_gain_db_per_mw"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"BrillouinParams.{name} must be > 0")


@dataclass(frozen=True)
class Contribution:
    center: float
    fwhm: float
    peak_db: float  # > 0 gain, < 0 loss

    def __post_init__(self):
        if not self.fwhm > 0:
            raise InvalidInputError("contribution fwhm must be > 0")


@dataclass(frozen=True)
class CompositeSpectrum:
    contributions: tuple[Contribution, ...] = ()

    def __post_init__(self):
        arr = np.array([(c.center, c.fwhm, c.peak_db) for c in self.contributions],
                       dtype=float).reshape(-1, 3)
        object.__setattr__(self, "_arr", arr)

    def __add__(self, other: "CompositeSpectrum") -> "CompositeSpectrum":
        return CompositeSpectrum(self.contributions + other.contributions)

    def __call__(self, nu):
        return net_gain_db(self, nu)

    def gains(self) -> tuple[Contribution, ...]:
        return tuple(c for c in self.contributions if c.peak_db > 0)

    def losses(self) -> tuple[Contribution, ...]:
        return tuple(c for c in self.contributions if c.peak_db < 0)


def lorentzian_db(nu, center, fwhm, peak_db):
    """Lorentzian line in dB: ``peak_db / (1 + (2 (nu - center) / fwhm)**2)``."""
    if np.any(np.asarray(fwhm) <= 0):
        raise InvalidInputError("fwhm must be > 0")
    x = 2.0 * (np.asarray(nu, dtype=float) - center) / fwhm
    out = peak_db / (1.0 + x * x)
    return float(out) if np.ndim(out) == 0 else out


def net_gain_db(spec: CompositeSpectrum, nu):
    """Net gain in dB at ``nu`` (scalar or array); 0 dB for an empty spectrum."""
    nu = np.asarray(nu, dtype=float)
    arr = spec._arr
    if arr.shape[0] == 0:
        out = np.zeros_like(nu)
    else:
        x = 2.0 * (nu[..., None] - arr[:, 0]) / arr[:, 1]
        out = (arr[:, 2] / (1.0 + x * x)).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def composite_spectrum(pump: ToneSet, params: BrillouinParams) -> CompositeSpectrum:
    if len(pump) == 0:
        raise InvalidInputError("pump tone set is empty")
    contribs = []
    for tone in pump:
        depth = tone.power_mw * params.peak_gain_db_per_mw
        contribs.append(Contribution(tone.frequency - params.f_sbs, params.linewidth, depth))
        contribs.append(Contribution(tone.frequency + params.f_sbs, params.linewidth, -depth))
    return CompositeSpectrum(tuple(contribs))


def bandwidth_3db(spec: CompositeSpectrum, search_window: tuple[float, float]) -> tuple[float, float]:
    """Peak location and full width at half the peak net gain.

    The width is taken between the two half-peak crossings (in dB) nearest
    the maximum. In the small-signal regime the excess probe power scales
    with the dB gain, so these are the -3 dB points of the amplified pulse;
    for a single line the result is exactly its Lorentzian FWHM.
    """
    lo, hi = map(float, search_window)
    if not hi > lo:
        raise InvalidInputError("search window must have hi > lo")
    fw = spec._arr[:, 1]
    step = (hi - lo) / (_GRID_POINTS - 1)
    if fw.size:
        step = min(step, fw.min() / 40.0)
    n = int(min(math.ceil((hi - lo) / step), 400_000)) + 1
    # local coordinates keep the refinement well conditioned at optical frequencies
    x = np.linspace(0.0, hi - lo, n)
    g = net_gain_db(spec, lo + x)
    k = int(np.argmax(g))
    if g[k] <= 0:
        raise NoPeakError(f"no positive gain in window [{lo:.6e}, {hi:.6e}] Hz")

    a, b = x[max(k - 1, 0)], x[min(k + 1, n - 1)]
    res = minimize_scalar(lambda u: -net_gain_db(spec, lo + u), bounds=(a, b),
                          method="bounded", options={"xatol": 0.1})
    xp, gp = (res.x, -res.fun) if -res.fun >= g[k] else (x[k], g[k])
    level = 0.5 * gp

    def f(u):
        return net_gain_db(spec, lo + u) - level

    below = np.nonzero(g < level)[0]
    left = below[below < k]
    right = below[below > k]
    if left.size == 0 or right.size == 0:
        raise WindowTooSmallError("half-peak crossing not bracketed inside the search window")
    i, j = left[-1], right[0]
    x_left = brentq(f, x[i], x[i + 1], xtol=_CROSSING_TOL_HZ)
    x_right = brentq(f, x[j - 1], x[j], xtol=_CROSSING_TOL_HZ)
    return float(lo + xp), float(x_right - x_left)


def reduction_composite(gain_peak_db: float, linewidth: float, offset: float, ratio: float,
                        center: float = 0.0) -> CompositeSpectrum:
    """Gain line flanked by two losses of depth ``ratio * gain_peak_db`` at ``center +- offset``."""
    parts = [Contribution(center, linewidth, gain_peak_db)]
    if ratio > 0:
        parts += [Contribution(center - offset, linewidth, -ratio * gain_peak_db),
                  Contribution(center + offset, linewidth, -ratio * gain_peak_db)]
    return CompositeSpectrum(tuple(parts))


@lru_cache(maxsize=64)
def calibrate_loss_depth(params: BrillouinParams, offset: float, target_fwhm: float,
                         gain_peak_db: float | None = None) -> float:
    """Loss-to-gain depth ratio ``r`` in [0, 1) giving the requested bandwidth.

    Checks that the width is non-increasing in ``r`` on a 20-point grid,
    then root-finds inside the grid cell that brackets the target.
    """
    if not offset > 0:
        raise InvalidInputError("offset must be > 0")
    if not target_fwhm > 0:
        raise InvalidInputError("target_fwhm must be > 0")
    g0 = params.peak_gain_db_per_mw if gain_peak_db is None else gain_peak_db
    half = offset + 3.0 * params.linewidth
    window = (-half, half)

    def width(r):
        return bandwidth_3db(reduction_composite(g0, params.linewidth, offset, r), window)[1]

    w0 = width(0.0)
    if target_fwhm > w0 + _CROSSING_TOL_HZ:
        raise InfeasibleError(f"target {target_fwhm:.4g} Hz exceeds natural bandwidth {w0:.4g} Hz")
    if abs(target_fwhm - w0) <= _CROSSING_TOL_HZ:
        return 0.0

    r_hi = 1.0 - 1e-9
    grid = np.linspace(0.0, r_hi, 20)
    try:
        widths = np.array([width(r) for r in grid])
    except (NoPeakError, WindowTooSmallError) as exc:
        raise InfeasibleError(f"bandwidth undefined inside the ratio bracket: {exc}") from exc
    if np.any(np.diff(widths) > _CROSSING_TOL_HZ):
        raise InfeasibleError("bandwidth is not monotone in the loss ratio for this offset")
    if target_fwhm < widths[-1] - _CROSSING_TOL_HZ:
        raise InfeasibleError(
            f"target {target_fwhm:.4g} Hz below the narrowest reachable width {widths[-1]:.4g} Hz")

    k = int(np.searchsorted(-widths, -target_fwhm))
    if k == 0:
        return 0.0
    if k == grid.size:
        return float(r_hi)
    return float(brentq(lambda r: width(r) - target_fwhm, grid[k - 1], grid[k], xtol=1e-12))


def spectrum_to_csv(spec: CompositeSpectrum, grid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["nu_hz", "gain_db"])
    grid = np.asarray(grid, dtype=float)
    for nu, g in zip(grid, net_gain_db(spec, grid)):
        w.writerow([repr(float(nu)), repr(float(g))])
    return buf.getvalue()
