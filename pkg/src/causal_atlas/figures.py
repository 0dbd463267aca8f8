"""Matplotlib figures rendered alongside the verification report."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .embedding import (SurfaceMap, IDENTITY_MAP, embed_cylinder, embed_minkowski)
from .metric import Event, Metric2D, Topology, sampling_window
from .verify import VerificationReport

__all__ = ["save_report_figures"]


def _sample_images(m: Metric2D, f: SurfaceMap, n: int, seed: int,
                   x_window) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    t0, t1 = m.t_range
    w0, w1 = sampling_window(m, x_window)
    ts = rng.uniform(t0, t1, n)
    xs = rng.uniform(w0, w1, n)
    horiz = np.empty(n)
    vert = np.empty(n)
    for i in range(n):
        p = Event(float(ts[i]), float(xs[i]))
        if m.topology is Topology.CIRCLE:
            e = embed_cylinder(m, p)
            horiz[i], vert[i] = e.theta, e.tau
        else:
            e = embed_minkowski(m, f, p)
            horiz[i], vert[i] = e.x, e.tau
    return ts, horiz, vert


def save_report_figures(directory: str | Path, m: Metric2D, f: SurfaceMap | None,
                        report: VerificationReport, *, seed: int = 0,
                        n_points: int = 400, x_window=None) -> list[Path]:
    """Render the image-region scatter and a verification summary as PNG files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    f = f or IDENTITY_MAP
    written = []

    ts, horiz, vert = _sample_images(m, f, n_points, seed, x_window)
    fig, ax = plt.subplots(figsize=(6.4, 5.0))
    sc = ax.scatter(horiz, vert, c=ts, s=8.0, cmap="coolwarm")
    fig.colorbar(sc, ax=ax, label="source t")
    w0, w1 = sampling_window(m, x_window)
    xs = np.linspace(w0, w1, 101)
    if m.topology is Topology.CIRCLE:
        slice_h = [embed_cylinder(m, Event(0.0, float(x))).theta for x in xs]
        ax.set_xlabel("theta")
    else:
        slice_h = [embed_minkowski(m, f, Event(0.0, float(x))).x for x in xs]
        ax.set_xlabel("X")
    ax.plot(slice_h, np.zeros_like(xs), color="crimson", lw=2.0, label="image of t=0 slice")
    ax.set_ylabel("tau")
    ax.set_title(f"embedded image region: {m.label or 'metric'}")
    ax.legend(loc="upper right", fontsize=8)
    path = directory / "image_region.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.2))
    counts = [report.agreements, len(report.disagreements), report.boundary_exclusions]
    ax1.bar(["agree", "disagree", "excluded"], counts,
            color=["#2077b4", "#d62728", "#b9bdd0"])
    ax1.set_title("order comparison")
    ax1.set_ylabel("pairs")
    for i, c in enumerate(counts):
        ax1.text(i, c, str(c), ha="center", va="bottom", fontsize=9)

    names = ["null", "conformality"]
    values = [max(report.max_null_residual, 1e-18),
              max(report.max_conformality_residual, 1e-18)]
    bounds = [1e-5, 1e-4]
    ax2.bar(names, values, color="#2077b4")
    for name, bound in zip(names, bounds):
        ax2.plot([names.index(name) - 0.4, names.index(name) + 0.4], [bound, bound],
                 color="#d62728", lw=1.5)
    ax2.set_yscale("log")
    ax2.set_title("max residuals vs bounds")
    fig.suptitle(f"verification: {m.label or 'metric'} "
                 f"({'pass' if report.passed else 'FAIL'})")
    fig.tight_layout()
    path = directory / "verification_summary.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
