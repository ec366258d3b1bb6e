"""Matplotlib rendering of convergence traces and sweep results."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_convergence(result, path) -> None:
    """Total energy versus outer iteration."""
    totals = result.trace.totals
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(totals.size), totals, marker="o")
    ax.set_xlabel("iteration")
    ax.set_ylabel("total energy (J)")
    ax.set_title(f"AO convergence ({result.trace.status})")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows, axis_name: str, path) -> None:
    """Seed-averaged total energy per scheme along the sweep axis."""
    schemes = sorted({r.scheme for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme in schemes:
        pts = {}
        for r in rows:
            if r.scheme == scheme:
                pts.setdefault(r.axis, []).append(r.total_energy_j)
        xs = sorted(pts)
        ys = [float(np.mean(pts[x])) for x in xs]
        ax.plot(xs, ys, marker="o", label=scheme)
    ax.set_xlabel(axis_name)
    ax.set_ylabel("total energy (J)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_bench(rows, path) -> None:
    """Seed-averaged total energy per scheme as a bar chart."""
    schemes = sorted({r.scheme for r in rows})
    means = []
    for scheme in schemes:
        vals = [r.total_energy_j for r in rows if r.scheme == scheme]
        means.append(float(np.mean(vals)))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(schemes, means)
    ax.set_ylabel("total energy (J)")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
