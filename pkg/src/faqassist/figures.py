"""Matplotlib figure rendering for corpus statistics and result tables.

All figures go straight to files (Agg backend); the CLI writes them next
to the delimited report output when asked.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus import Conversation
from .evaluation import EvalReport

BAR_COLOR = "#4878a8"
SECOND_COLOR = "#d1605e"


def conversation_length_figure(
    convs: Sequence[Conversation], path: str | Path
) -> Path:
    """Bar chart of utterance counts per conversation."""
    path = Path(path)
    ids = [c.id for c in convs]
    lengths = [len(c.utterances) for c in convs]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.35 * len(ids) + 2), 4.0))
    ax.bar(range(len(ids)), lengths, color=BAR_COLOR)
    ax.set_xticks(range(len(ids)))
    ax.set_xticklabels(ids, rotation=60, ha="right", fontsize=8)
    ax.set_xlabel("conversation")
    ax.set_ylabel("utterances")
    ax.set_title("Conversation lengths")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def faq_count_figure(per_faq_counts: Mapping[int, int], path: str | Path) -> Path:
    """Bar chart of gold annotation counts per FAQ id."""
    path = Path(path)
    items = sorted(per_faq_counts.items())
    fig, ax = plt.subplots(figsize=(max(6.0, 0.3 * len(items) + 2), 4.0))
    ax.bar(range(len(items)), [n for _, n in items], color=BAR_COLOR)
    ax.set_xticks(range(len(items)))
    ax.set_xticklabels([str(fid) for fid, _ in items], rotation=60, fontsize=8)
    ax.set_xlabel("FAQ id")
    ax.set_ylabel("annotated utterances")
    ax.set_title("Gold FAQ distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def report_figure(reports: Sequence[EvalReport], path: str | Path) -> Path:
    """Grouped bars of both MRR@10 values per model/setting row."""
    path = Path(path)
    ordered = sorted(reports, key=lambda r: (r.model, r.setting))
    labels = [
        r.model if r.setting == "n/a" else f"{r.model}\n{r.setting}" for r in ordered
    ]
    xs = range(len(ordered))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(ordered) + 2), 4.0))
    ax.bar(
        [x - width / 2 for x in xs],
        [r.mrr_no_suggestion for r in ordered],
        width,
        label="no-suggestion",
        color=BAR_COLOR,
    )
    ax.bar(
        [x + width / 2 for x in xs],
        [r.mrr_faq for r in ordered],
        width,
        label="faq",
        color=SECOND_COLOR,
    )
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("MRR@10")
    ax.set_title("Dual-class MRR@10")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
