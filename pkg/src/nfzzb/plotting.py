"""Render BoundCurve objects to PNG files (log-MSE vs SNR in dB)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_STYLES = {
    "zzb": dict(color="C0", lw=2.0, label="ZZB"),
    "crb_global": dict(color="C1", ls="--", lw=1.5, label="CRB (global)"),
    "asymptote": dict(color="C2", ls=":", lw=1.5, label="high-SNR asymptote"),
    "mle_mse": dict(color="C3", ls="none", marker="o", ms=4, label="MLE (Monte Carlo)"),
}


def plot_curve(curve, path):
    """One PNG per curve: every series on a log-y axis against SNR (dB).

    The mle_stderr series is drawn as an error band around mle_mse rather
    than as its own line.  Returns the written path.
    """
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for name, style in _STYLES.items():
        if name not in curve.series:
            continue
        xs = [db for db, v in zip(curve.snr_db, curve.series[name]) if v is not None and v > 0]
        ys = [v for v in curve.series[name] if v is not None and v > 0]
        if not xs:
            continue
        ax.plot(xs, ys, **style)
        if name == "mle_mse" and "mle_stderr" in curve.series:
            err = [e for v, e in zip(curve.series["mle_mse"], curve.series["mle_stderr"])
                   if v is not None and v > 0]
            lo = [max(v - e, 1e-300) for v, e in zip(ys, err)]
            hi = [v + e for v, e in zip(ys, err)]
            ax.fill_between(xs, lo, hi, color="C3", alpha=0.2, lw=0)
    ax.set_yscale("log")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel(f"MSE [{curve.units}]")
    ax.set_title(f"{curve.parameter} bounds")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_curves(curves, out_base):
    """Render one PNG per curve next to `out_base` (suffixing the parameter
    when there are several); returns the written paths."""
    curves = list(curves)
    stem, _ = os.path.splitext(out_base)
    written = []
    for curve in curves:
        target = f"{stem}.png" if len(curves) == 1 else f"{stem}_{curve.parameter}.png"
        written.append(plot_curve(curve, target))
    return written
