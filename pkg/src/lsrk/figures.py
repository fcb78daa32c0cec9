"""Figure rendering for experiment reports (headless, files only)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_curve_figure", "save_destripe_panel"]


def save_curve_figure(path, mean, series, ylabel="relative error"):
    """Semilogy convergence plot: faint per-trial curves plus their mean."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in series:
        ax.semilogy(np.arange(1, len(s) + 1), s, color="steelblue",
                    alpha=0.25, linewidth=0.8)
    ax.semilogy(np.arange(1, len(mean) + 1), mean, color="crimson",
                linewidth=1.8, label=f"mean over {len(series)} trial(s)")
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _front_slice(t):
    t = np.asarray(t)
    idx = (slice(None), slice(None)) + (0,) * (t.ndim - 2)
    return t[idx]


def save_destripe_panel(path, original, observed, recovered):
    """Side-by-side frontal slices: clean, striped, and recovered."""
    panels = [("original", _front_slice(original)),
              ("observed", _front_slice(observed)),
              ("recovered", _front_slice(recovered))]
    fig, axes = plt.subplots(1, 3, figsize=(9, 3.2))
    vmin = min(p.min() for _, p in panels)
    vmax = max(p.max() for _, p in panels)
    for ax, (title, img) in zip(axes, panels):
        ax.imshow(img, cmap="gray", vmin=vmin, vmax=vmax)
        ax.set_title(title)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
