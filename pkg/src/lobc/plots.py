"""Figure rendering for the CLI report paths.

Figures are written next to the delimited data files they illustrate.  All
rendering is off-screen and deterministic: fixed sizes, fixed dpi, and a
fixed metadata block so reruns produce byte-identical PNG files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": "lobc"}}

plt.rcParams.update(
    {
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "figure.constrained_layout.use": True,
    }
)


def _time_sharing_line(ax, c1: float, c2: float):
    ax.plot([0.0, c1], [c2, 0.0], color="black", lw=1.0, label="time sharing")


def region_figure(path: "str | Path", before, after, boundary, c1: float, c2: float):
    """Two-panel scatter of the sampled cloud, before and after the filter."""
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0), sharex=True, sharey=True)
    for ax, points, title in ((axes[0], before, "before filter"), (axes[1], after, "after filter")):
        if points:
            xs = [p.r1 for p in points]
            ys = [p.r2 for p in points]
            ax.scatter(xs, ys, s=2.5, alpha=0.35, color="tab:blue", linewidths=0)
        _time_sharing_line(ax, c1, c2)
        ax.set_title(title)
        ax.set_xlabel("R1 (nats)")
    if boundary:
        xs = [p.r1 for p in boundary]
        ys = [p.r2 for p in boundary]
        axes[1].scatter(xs, ys, s=14, color="tab:red", marker="x", label="boundary sweep")
    axes[0].set_ylabel("R2 (nats)")
    axes[1].legend(loc="upper right")
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def curve_figure(path: "str | Path", points, c1: float, c2: float, label: str):
    """Closed-form rate curve against the time-sharing line."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.plot(points[:, 1], points[:, 2], color="tab:blue", lw=1.5, label=label)
    _time_sharing_line(ax, c1, c2)
    ax.set_xlabel("R1 (nats)")
    ax.set_ylabel("R2 (nats)")
    ax.legend(loc="upper right")
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def sweep_figure(path: "str | Path", boundary, c1: float, c2: float):
    """Boundary sweep of an erasure broadcast pair against its capacity line."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    if boundary:
        xs = [p.r1 for p in boundary]
        ys = [p.r2 for p in boundary]
        ax.scatter(xs, ys, s=14, color="tab:red", marker="x", label="boundary sweep")
    _time_sharing_line(ax, c1, c2)
    ax.set_xlabel("R1 (nats)")
    ax.set_ylabel("R2 (nats)")
    ax.legend(loc="upper right")
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
