"""PNG figures rendered next to the CSV outputs of each experiment."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

MHZ = 1e6
GHZ = 1e9


def _save(fig, path) -> None:
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-stable
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)


def spectrum(path, detuning, curves: dict, summary: dict) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode, g in curves.items():
        ax.plot(detuning / MHZ, g, label=f"{mode} ({summary[mode]['fwhm_hz'] / MHZ:.2f} MHz)")
    ax.axhline(0, color="0.6", lw=0.8)
    ax.set_xlabel("detuning from gain centre (MHz)")
    ax.set_ylabel("net gain (dB)")
    ax.legend()
    _save(fig, path)


def calibration(path, points, cal) -> None:
    pts = np.asarray(points, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(pts[:, 0] * 1e3, pts[:, 1] / GHZ, ".", ms=2, label="measured")
    t = np.array([pts[:, 0].min(), pts[:, 0].max()])
    ax.plot(t * 1e3, cal(t) / GHZ, "-", lw=1,
            label=f"f = {cal.slope / 1e9:.4f} GHz/s * t {cal.intercept / MHZ:+.2f} MHz")
    ax.set_xlabel("time after reference pulse (ms)")
    ax.set_ylabel("frequency (GHz)")
    ax.legend()
    _save(fig, path)


def errors(path, lines, title: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for line in lines:
        ax.plot(np.asarray(line.truth) / GHZ, np.asarray(line.errors) / MHZ, ".", ms=3,
                label=line.label)
    ax.axhline(0, color="0.6", lw=0.8)
    ax.set_xlabel("frequency (GHz)")
    ax.set_ylabel("error (MHz)")
    ax.set_title(title)
    ax.legend(fontsize="small")
    _save(fig, path)


def resolution(path, rows, limits: dict) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode in ("reduced", "unreduced"):
        sel = [(r[0], r[3]) for r in rows if r[1] == mode]
        d = np.array([s[0] for s in sel]) / MHZ
        ok = np.array([s[1] for s in sel], dtype=float)
        ax.step(d, ok + (0.02 if mode == "reduced" else -0.02), where="mid",
                label=f"{mode} (limit {limits[mode] / MHZ if limits[mode] else float('nan'):.0f} MHz)")
    ax.set_xlabel("separation (MHz)")
    ax.set_ylabel("resolved")
    ax.set_yticks([0, 1])
    ax.legend()
    _save(fig, path)


def trace_pair(path, traces: dict, t_centre: float, half_window: float = 3e-3) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode, tr in traces.items():
        t = tr.times
        sel = np.abs(t - t_centre) < half_window
        ax.plot((t[sel] - t_centre) * 1e3, tr.samples[sel] * 1e3, lw=1, label=mode)
    ax.set_xlabel("time around 0.5 GHz pulse (ms)")
    ax.set_ylabel("detected power (mW)")
    ax.legend()
    _save(fig, path)


def trace(path, tr) -> None:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(tr.times, tr.samples * 1e3, lw=0.6)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("detected power (mW)")
    _save(fig, path)
