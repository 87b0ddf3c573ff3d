"""Figure rendering for the command-line reports.

Each report command has one renderer that takes the arrays already
collected for the delimited output and saves a PNG next to it.  The Agg
backend is forced so rendering works without a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_pulse_family",
    "plot_tailor_sweep",
    "plot_effective_params",
    "plot_compare",
    "plot_scaling",
    "plot_propagate",
]

_DPI = 150


def _positive(values):
    values = np.asarray(values, dtype=float)
    return np.where(values > 0.0, values, np.nan)


def plot_pulse_family(times, curves, labels, path: str) -> None:
    """Overlay of the exchange envelopes J(t) in one axis."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for curve, label in zip(curves, labels):
        ax.plot(times, curve, lw=1.4, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("J(t)")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_tailor_sweep(lams, j0s, taus, deviations, path: str) -> None:
    """Tailored height/width curves and the flatness of the mean vector."""
    fig, (ax_pulse, ax_dev) = plt.subplots(1, 2, figsize=(10.0, 4.2))
    ax_pulse.plot(lams, j0s, "o-", label="j0")
    ax_pulse.plot(lams, taus, "s-", label="tau")
    ax_pulse.set_xlabel("lambda")
    ax_pulse.set_ylabel("pulse parameter")
    ax_pulse.legend()
    ax_dev.semilogy(lams, _positive(deviations), "o-")
    ax_dev.set_xlabel("lambda")
    ax_dev.set_ylabel("relative deviation of mean vector")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_effective_params(lams, norms: dict, path: str) -> None:
    """Norms of the four pulse averages against the strength."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for name, values in norms.items():
        ax.semilogy(lams, _positive(values), "o-", label=name)
    ax.set_xlabel("lambda")
    ax.set_ylabel("parameter norm")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_compare(lams, distances, gaps, path: str) -> None:
    """Gate distance and parameter gap of the model against the strength."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.semilogy(lams, _positive(distances), "o-", label="gate distance")
    gaps = np.asarray(
        [np.nan if gap is None else gap for gap in gaps], dtype=float
    )
    if np.any(np.isfinite(gaps)):
        ax.semilogy(lams, _positive(gaps), "s--", label="parameter gap")
    ax.set_xlabel("lambda")
    ax.set_ylabel("deviation")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_scaling(curves: list, path: str) -> None:
    """Log-log model error per truncation order with fitted slopes.

    ``curves`` holds (order, strengths, distances, slope) tuples.
    """
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for order, strengths, distances, slope in curves:
        label = f"order {order}"
        if slope is not None:
            label += f" (slope {slope:.2f})"
        ax.loglog(strengths, _positive(distances), "o-", label=label)
    ax.set_xlabel("peak anisotropy")
    ax.set_ylabel("gate distance")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_propagate(times, envelope, integral, path: str) -> None:
    """Envelope and running integral of the propagated pulse."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(times, envelope, lw=1.4, color="tab:blue", label="J(t)")
    ax.set_xlabel("t")
    ax.set_ylabel("J(t)", color="tab:blue")
    twin = ax.twinx()
    twin.plot(times, integral, lw=1.4, color="tab:orange", label="x(t)")
    twin.set_ylabel("x(t)", color="tab:orange")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
