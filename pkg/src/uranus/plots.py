"""Figure rendering for the report and signature-analysis paths.

Every function writes one PNG and returns its path. Figures are plain
matplotlib on the Agg backend so they render identically headless; maps
use a raw lat/lon equirectangular projection, which is sub-meter honest
at the two-kilometer extent of the monitored zone.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import SENSOR_ORDER, SENSORS
from .pipeline import CLASS_NAMES, REGRESSION_TARGETS

# One stable color per drone class, in class order.
_CLASS_COLORS = dict(zip(CLASS_NAMES, ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728")))


def _sensor_markers(ax):
    for name in SENSOR_ORDER:
        spec = SENSORS[name]
        ax.plot(
            spec.position.lon_deg,
            spec.position.lat_deg,
            marker="^",
            color="black",
            markersize=8,
            linestyle="none",
        )
        ax.annotate(
            name,
            (spec.position.lon_deg, spec.position.lat_deg),
            textcoords="offset points",
            xytext=(5, 5),
            fontsize=8,
        )


def save_track_figure(path, estimates, truth=None) -> str:
    """Predicted track over ground, colored by predicted type, plus the
    sensor network; the truth track is drawn underneath when given."""
    fig, ax = plt.subplots(figsize=(8, 7))
    if truth:
        ax.plot(
            [rec.position.lon_deg for rec in truth],
            [rec.position.lat_deg for rec in truth],
            color="0.7",
            linewidth=3,
            label="truth",
            zorder=1,
        )
    by_type: dict = {}
    for est in estimates:
        by_type.setdefault(est.drone_type, []).append(est)
    for name, group in sorted(by_type.items()):
        ax.scatter(
            [e.longitude for e in group],
            [e.latitude for e in group],
            s=6,
            color=_CLASS_COLORS.get(name, "#555555"),
            label=name,
            zorder=2,
        )
    _sensor_markers(ax)
    ax.set_xlabel("longitude [deg]")
    ax.set_ylabel("latitude [deg]")
    ax.set_title("predicted track")
    ax.legend(loc="best", fontsize=8)
    ax.ticklabel_format(useOffset=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_regression_figure(path, estimates, truth) -> str:
    """Per-target predicted and truth series on a shared time axis."""
    by_t = {rec.t: rec for rec in truth}
    pairs = [(est, by_t[est.t]) for est in estimates if est.t in by_t]
    t0 = min(est.t for est, _ in pairs)
    ts = [(est.t - t0) / 1000.0 for est, _ in pairs]
    pulls = {
        "latitude": (lambda e: e.latitude, lambda r: r.position.lat_deg, "deg"),
        "longitude": (lambda e: e.longitude, lambda r: r.position.lon_deg, "deg"),
        "speed": (lambda e: e.speed, lambda r: r.speed_mps, "m/s"),
        "altitude": (
            lambda e: e.altitude,
            lambda r: r.position.alt_m if r.position.alt_m is not None else 0.0,
            "m",
        ),
    }
    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)
    for ax, target in zip(axes.ravel(), REGRESSION_TARGETS):
        pull_est, pull_rec, unit = pulls[target]
        ax.plot(ts, [pull_rec(rec) for _, rec in pairs], color="0.7", linewidth=2, label="truth")
        ax.plot(
            ts,
            [pull_est(est) for est, _ in pairs],
            color="#1f77b4",
            linewidth=0.8,
            label="predicted",
        )
        ax.set_title(target)
        ax.set_ylabel(unit)
        ax.ticklabel_format(useOffset=False)
    for ax in axes[1]:
        ax.set_xlabel("time [s]")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_confusion_figure(path, classification: dict) -> str:
    """Heatmap of the confusion matrix from a classification report."""
    labels = classification["confusion"]["labels"]
    matrix = np.array(classification["confusion"]["matrix"], dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    im = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(labels)), labels, rotation=30, ha="right", fontsize=8)
    ax.set_yticks(range(len(labels)), labels, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    for i in range(len(labels)):
        for j in range(len(labels)):
            v = int(matrix[i, j])
            color = "white" if matrix[i, j] > matrix.max() / 2 else "black"
            ax.text(j, i, str(v), ha="center", va="center", color=color, fontsize=8)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(f"accuracy {classification['accuracy']:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_rcs_figure(path, models) -> str:
    """Fitted cross-section PDFs, one curve per drone type."""
    fig, ax = plt.subplots(figsize=(8, 5))
    lo = min(m.mean_dbsm - 4 * max(m.sigma_dbsm, 0.5) for m in models)
    hi = max(m.mean_dbsm + 4 * max(m.sigma_dbsm, 0.5) for m in models)
    xs = np.linspace(lo, hi, 400)
    for m in models:
        ax.plot(
            xs,
            [m.pdf(float(x)) for x in xs],
            color=_CLASS_COLORS.get(m.drone_type, "#555555"),
            label=f"{m.drone_type} (mean {m.mean_dbsm:.2f})",
        )
    ax.set_xlabel("RCS [dBsm]")
    ax.set_ylabel("density")
    ax.set_title("radar cross-section fits")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_freq_figure(path, likelihoods) -> str:
    """Operating-channel probability mass, one panel per drone type."""
    n = len(likelihoods)
    fig, axes = plt.subplots(n, 1, figsize=(8, 2.4 * n), squeeze=False)
    for ax, fl in zip(axes.ravel(), likelihoods):
        channels = sorted(fl.pmf)
        ax.bar(
            range(len(channels)),
            [fl.pmf[c] for c in channels],
            color=_CLASS_COLORS.get(fl.drone_type, "#555555"),
        )
        ax.set_xticks(range(len(channels)), [f"{c:g}" for c in channels], fontsize=8)
        ax.set_ylabel("p")
        ax.set_title(
            f"{fl.drone_type}: mode {fl.mode_mhz:g} MHz "
            f"(p = {fl.mode_probability:.2f})",
            fontsize=9,
        )
    axes.ravel()[-1].set_xlabel("channel [MHz]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def save_distance_figure(path, series_list, title="") -> str:
    """Drone-to-sensor ranges over time with the altitude underneath."""
    fig, (ax_d, ax_a) = plt.subplots(
        2, 1, figsize=(9, 6), sharex=True, height_ratios=[2, 1]
    )
    t0 = min(s.distances[0][0] for s in series_list)
    for s in series_list:
        ts = [(t - t0) / 1000.0 for t, _ in s.distances]
        ax_d.plot(ts, [d for _, d in s.distances], label=s.sensor, linewidth=1)
    first = series_list[0]
    ts = [(t - t0) / 1000.0 for t, _ in first.altitudes]
    ax_a.plot(ts, [a for _, a in first.altitudes], color="black", linewidth=1)
    ax_d.set_ylabel("distance [m]")
    ax_d.legend(fontsize=8)
    ax_d.set_title(title or "drone-to-sensor distance")
    ax_a.set_ylabel("altitude [m]")
    ax_a.set_xlabel("time [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
