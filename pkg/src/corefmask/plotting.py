"""Figures written next to score tables."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

METRICS = [("muc.f1", "MUC"), ("b3.f1", "B$^3$"), ("ceaf_e.f1", "CEAF$_e$"), ("conll", "CoNLL"),
           ("zero.f1", "zero (simpl.)")]


def plot_scores(rows, path, title="F1 per dataset"):
    """Grouped bars, one group per row (dataset), one bar per metric, values in percent."""
    labels = [str(r.get("dataset", "")) for r in rows]
    x = np.arange(len(rows))
    width = 0.8 / len(METRICS)
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(rows) + 2), 3.2))
    for i, (key, name) in enumerate(METRICS):
        values = [100 * r.get(key, 0.0) for r in rows]
        ax.bar(x + (i - (len(METRICS) - 1) / 2) * width, values, width, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylim(0, 105)
    ax.set_ylabel("F1 (%)")
    ax.set_title(title)
    ax.legend(fontsize=7, ncol=len(METRICS), loc="upper center", bbox_to_anchor=(0.5, -0.35), frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
