"""Figure rendering for the stats and sweep commands.

Everything goes through the Agg backend so the CLI works headless; figures
land next to the delimited reports they visualize.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from skillex.taxonomy import StatsReport

TOP_N = 10


def _barh_counter(ax, counter: Counter, title: str, fmt=lambda k: " ".join(k)):
    top = counter.most_common(TOP_N)
    labels = [fmt(k) for k, _ in top][::-1]
    values = [c for _, c in top][::-1]
    ax.barh(range(len(values)), values, color="#4878a8")
    ax.set_yticks(range(len(values)), labels=labels, fontsize=7)
    ax.set_title(title, fontsize=9)
    ax.tick_params(axis="x", labelsize=7)


def save_stats_figure(report: StatsReport, path: str | Path, corpus_pos: dict | None = None) -> Path:
    """Render inventory statistics, and per-split gold span POS sequences
    when corpus_pos (split -> Counter) is given."""
    n_corpus = len(corpus_pos) if corpus_pos else 0
    n_axes = 5 + n_corpus
    n_cols = 3
    n_rows = (n_axes + n_cols - 1) // n_cols
    fig, axes = plt.subplots(n_rows, n_cols, figsize=(4.2 * n_cols, 3.2 * n_rows))
    axes = axes.ravel()

    lengths = sorted(report.length_histogram)
    axes[0].bar(lengths, [report.length_histogram[n] for n in lengths], color="#4878a8")
    axes[0].set_title(f"phrase length (median {report.length_median:g})", fontsize=9)
    axes[0].set_xlabel("tokens", fontsize=8)
    axes[0].tick_params(labelsize=7)

    for i, n in enumerate((1, 2, 3), start=1):
        _barh_counter(axes[i], report.ngram_freq[n], f"top {n}-grams")

    if report.pos_seq_freq is not None:
        _barh_counter(axes[4], report.pos_seq_freq, "inventory POS sequences")
    else:
        axes[4].set_axis_off()

    for i, (split, counter) in enumerate(sorted((corpus_pos or {}).items()), start=5):
        _barh_counter(axes[i], counter, f"gold span POS ({split})")

    for ax in axes[n_axes:]:
        ax.set_axis_off()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_figure(points: list, path: str | Path) -> Path:
    """Precision/recall/F1 against tau, strict and loose side by side."""
    taus = [pt.tau for pt in points]
    fig, (ax_s, ax_l) = plt.subplots(1, 2, figsize=(9, 3.4), sharey=True)
    for ax, mode in ((ax_s, "strict"), (ax_l, "loose")):
        reports = [getattr(pt, mode) for pt in points]
        ax.plot(taus, [r.precision for r in reports], marker="o", label="precision")
        ax.plot(taus, [r.recall for r in reports], marker="s", label="recall")
        ax.plot(taus, [r.f1 for r in reports], marker="^", label="f1")
        ax.set_title(mode, fontsize=9)
        ax.set_xlabel("tau", fontsize=8)
        ax.tick_params(labelsize=7)
        ax.grid(alpha=0.3)
    ax_s.set_ylabel("score", fontsize=8)
    ax_l.legend(fontsize=7)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
