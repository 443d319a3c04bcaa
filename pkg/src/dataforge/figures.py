"""Matplotlib renderings of run reports, written next to the text output."""

from __future__ import annotations

import os
from typing import Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def mixture_frequency_figure(
    path: str | os.PathLike,
    names: Sequence[str],
    expected: Sequence[float],
    observed: Sequence[float],
) -> None:
    """Expected vs empirical draw frequencies, one bar pair per dataset."""
    plt = _pyplot()
    import numpy as np

    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(8, 0.45 * len(names)), 4.5))
    ax.bar(x - 0.2, expected, width=0.4, label="expected", color="#4878d0")
    ax.bar(x + 0.2, observed, width=0.4, label="observed", color="#ee854a")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("draw frequency")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def efficiency_figure(
    path: str | os.PathLike,
    labels: Sequence[str],
    tokens_per_char: Sequence[float],
    fallback_fraction: Sequence[float],
) -> None:
    plt = _pyplot()
    import numpy as np

    x = np.arange(len(labels))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    ax1.bar(x, tokens_per_char, color="#4878d0")
    ax1.set_xticks(x)
    ax1.set_xticklabels(labels)
    ax1.set_ylabel("tokens per char")
    ax2.bar(x, fallback_fraction, color="#ee854a")
    ax2.set_xticks(x)
    ax2.set_xticklabels(labels)
    ax2.set_ylabel("fallback fraction")
    ax2.set_ylim(0, 1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def latency_figure(
    path: str | os.PathLike,
    ks: Sequence[int],
    autoregressive: Sequence[float],
    parallel: Sequence[float],
) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, autoregressive, marker="o", label="autoregressive")
    ax.plot(ks, parallel, marker="s", label="parallel")
    ax.set_xlabel("chunk size K")
    ax.set_ylabel("decode latency (s)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
