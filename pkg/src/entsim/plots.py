"""Figure rendering for the report path.

Every helper returns a matplotlib Figure; ``save_figure`` writes it to a
PNG next to the delimited output.  The Agg backend is forced so the CLI
works headless.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .qkdsim import RatePoint


def save_figure(fig, path) -> None:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def rate_curve_figure(points: Sequence[RatePoint]):
    """Sifted/secret rate (log scale) and QBER versus link length."""
    lengths = [p.length_km for p in points]
    fig, (ax_r, ax_q) = plt.subplots(2, 1, figsize=(6.0, 6.5), sharex=True)
    ax_r.semilogy(lengths, [max(p.sifted_hz, 1e-12) for p in points], label="sifted")
    ax_r.semilogy(lengths, [max(p.secret_hz, 1e-12) for p in points], label="secret")
    ax_r.set_ylabel("rate (bit/s)")
    ax_r.legend()
    ax_r.grid(True, alpha=0.3)
    ax_q.plot(lengths, [p.qber for p in points], color="C3")
    ax_q.axhline(0.15, color="gray", ls="--", lw=1)
    ax_q.set_xlabel("link length (km)")
    ax_q.set_ylabel("QBER")
    ax_q.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def profile_figure(profile: Mapping[str, float], title: str = "coincidence profile"):
    """Bar chart of outcome-pattern probabilities."""
    labels = list(profile)
    values = [profile[k] for k in labels]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(labels) + 1.5), 3.5))
    ax.bar(range(len(labels)), values, color="C0")
    ax.set_xticks(range(len(labels)), labels)
    ax.set_ylabel("probability")
    ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    return fig


def threshold_figure(sweep: Sequence[tuple[float, float]]):
    """Critical detection efficiency versus state asymmetry."""
    alphas = [a for a, _ in sweep]
    etas = [e for _, e in sweep]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot(alphas, etas, "o-", color="C0")
    ax.axhline(2.0 / 3.0, color="gray", ls="--", lw=1, label="2/3")
    ax.axhline(2.0 / (1.0 + np.sqrt(2.0)), color="C3", ls=":", lw=1,
               label="2/(1+sqrt 2)")
    ax.set_xlabel("state amplitude alpha")
    ax.set_ylabel("critical efficiency")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def matrix_figure(mat: np.ndarray, title: str = "density matrix"):
    """Side-by-side real/imaginary heat maps of a matrix."""
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.6))
    lim = max(1e-12, float(np.max(np.abs(mat))))
    for ax, part, name in ((axes[0], mat.real, "Re"), (axes[1], mat.imag, "Im")):
        im = ax.imshow(part, cmap="RdBu_r", vmin=-lim, vmax=lim)
        ax.set_title(f"{name} {title}")
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    return fig


def bar_pair_figure(labels: Sequence[str], values: Sequence[float],
                    ylabel: str, title: str, hline: float | None = None):
    """Labeled bar chart with an optional reference line."""
    fig, ax = plt.subplots(figsize=(max(4.0, 0.8 * len(labels) + 1.5), 3.6))
    ax.bar(range(len(labels)), values, color="C0")
    ax.set_xticks(range(len(labels)), labels)
    if hline is not None:
        ax.axhline(hline, color="gray", ls="--", lw=1)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    return fig
