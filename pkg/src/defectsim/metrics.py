"""Evaluation metrics for simulated runs and their aggregation.

All evaluation is against the *true* labels.  The binary metrics judge the
effective predictions (what was acted on); ranking quality (AUC) judges the
raw model scores, so forcing a prediction to positive changes
precision/recall/F1 but never AUC.

AUC is the Mann–Whitney pairwise statistic: the fraction of
(defective, non-defective) pairs where the defective module scored higher,
ties counting one half.  A run whose true labels are all one class has no
such pairs; its AUC is undefined (``None``) and excluded from aggregation,
with the exclusion counted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .simulator import RunTrace

__all__ = [
    "RunMetrics",
    "AggregateMetrics",
    "confusion",
    "precision_recall_f1",
    "auc",
    "run_metrics",
    "aggregate",
    "diff",
]

METRIC_FIELDS = ("tp", "fp", "tn", "fn", "precision", "recall", "f1", "auc")
DIFF_FIELDS = ("auc", "precision", "recall", "f1")


@dataclass(frozen=True)
class RunMetrics:
    """Metrics of one simulated run."""

    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    auc: float | None


@dataclass(frozen=True)
class AggregateMetrics:
    """Mean and sample standard deviation of each metric over repetitions."""

    repetitions: int
    means: Mapping[str, float]
    stds: Mapping[str, float]
    auc_defined: int


def confusion(trace: RunTrace) -> tuple[int, int, int, int]:
    """(tp, fp, tn, fn) of effective predictions against true labels."""
    tp = fp = tn = fn = 0
    for row in trace.rows:
        if row.effective_prediction == 1:
            if row.true_label == 1:
                tp += 1
            else:
                fp += 1
        else:
            if row.true_label == 1:
                fn += 1
            else:
                tn += 1
    return tp, fp, tn, fn


def precision_recall_f1(counts: tuple[int, int, int, int]) -> tuple[float, float, float]:
    """Precision, recall and F1 from (tp, fp, tn, fn); empty denominators give 0.

    A run with no positive predictions has precision 0, and one with no truly
    defective modules has recall 0 — the conventional "no credit" reading.
    """
    tp, fp, _tn, fn = counts
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def auc(scores: Sequence[float], labels: Sequence[int]) -> float | None:
    """Mann–Whitney AUC of scores against binary labels; ties count 0.5.

    Computed from midranks, which equals the explicit sum over all
    (positive, negative) pairs exactly, not just approximately.  Returns
    ``None`` when either class is absent.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.ndim != 1 or labels.ndim != 1:
        raise ValueError("scores and labels must be 1-dimensional")
    if len(scores) != len(labels):
        raise ValueError(f"length mismatch: {len(scores)} scores vs {len(labels)} labels")
    values = np.unique(labels)
    if not np.isin(values, (0, 1)).all():
        raise ValueError(f"labels must be binary 0/1, got values {values}")
    n_pos = int((labels == 1).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(len(scores))
    start = 0
    for end in range(1, len(scores) + 1):
        if end == len(scores) or sorted_scores[end] != sorted_scores[start]:
            # 1-based positions start+1 .. end share the midrank.
            ranks[order[start:end]] = (start + 1 + end) / 2
            start = end
    rank_sum_pos = float(ranks[np.asarray(labels) == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def run_metrics(trace: RunTrace) -> RunMetrics:
    """All metrics of one run: confusion counts, P/R/F1, and AUC."""
    counts = confusion(trace)
    precision, recall, f1 = precision_recall_f1(counts)
    area = auc(
        [row.raw_score for row in trace.rows],
        [row.true_label for row in trace.rows],
    )
    tp, fp, tn, fn = counts
    return RunMetrics(
        tp=tp, fp=fp, tn=tn, fn=fn,
        precision=precision, recall=recall, f1=f1, auc=area,
    )


def aggregate(runs: Sequence[RunMetrics]) -> AggregateMetrics:
    """Fieldwise mean and sample (n-1) standard deviation over runs.

    A single run aggregates to its own values with standard deviation 0.
    Runs with undefined AUC are excluded from the AUC statistics only;
    ``auc_defined`` reports how many runs contributed.  With no defined AUC
    at all, the AUC mean and standard deviation are NaN.
    """
    if not runs:
        raise ValueError("cannot aggregate an empty list of runs")
    means: dict[str, float] = {}
    stds: dict[str, float] = {}
    for name in METRIC_FIELDS:
        if name == "auc":
            values = np.array([r.auc for r in runs if r.auc is not None], dtype=float)
        else:
            values = np.array([getattr(r, name) for r in runs], dtype=float)
        if len(values) == 0:
            means[name] = float("nan")
            stds[name] = float("nan")
        else:
            means[name] = float(values.mean())
            stds[name] = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    auc_defined = sum(r.auc is not None for r in runs)
    return AggregateMetrics(
        repetitions=len(runs), means=means, stds=stds, auc_defined=auc_defined
    )


def diff(base: AggregateMetrics, other: AggregateMetrics) -> dict[str, float]:
    """Per-metric differences of means, ``other - base``.

    Covers the four reported metrics (auc, precision, recall, f1); a positive
    value means ``other`` scored higher.
    """
    return {name: other.means[name] - base.means[name] for name in DIFF_FIELDS}
