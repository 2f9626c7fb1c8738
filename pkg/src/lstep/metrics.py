"""Ranking metrics computed from first principles.

Average precision follows the precision-at-k / recall-increment form over
a score-descending ranking with stable tie order. ROC-AUC is the
Mann-Whitney statistic with ties counted half; both reduce to integer
pair counts followed by a single float division, so results are exact.
"""
from __future__ import annotations

import numpy as np

__all__ = ["average_precision", "roc_auc"]


def _validate(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise ValueError(
            f"scores/labels shapes disagree: {scores.shape} vs {labels.shape}"
        )
    if scores.size == 0:
        raise ValueError("empty metric input")
    uniq = set(np.unique(labels).tolist())
    if not uniq <= {0, 1}:
        raise ValueError(f"labels must be 0/1, got {sorted(uniq)}")
    return scores, labels.astype(np.int64)


def average_precision(scores, labels) -> float:
    """Sum of precision@k * recall-increment over the descending ranking."""
    scores, labels = _validate(scores, labels)
    num_pos = int(labels.sum())
    if num_pos == 0:
        raise ValueError("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    ranked = labels[order]
    total = 0.0
    hits = 0
    for k, y in enumerate(ranked.tolist(), start=1):
        if y == 1:
            hits += 1
            total += hits / k
    return total / num_pos


def roc_auc(scores, labels) -> float:
    """P(score+ > score-) with ties counted 0.5; needs both classes."""
    scores, labels = _validate(scores, labels)
    num_pos = int(labels.sum())
    num_neg = int(labels.size - num_pos)
    if num_pos == 0 or num_neg == 0:
        raise ValueError("roc_auc needs both classes present")
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    y = labels[order]
    wins = 0  # positive strictly above negative
    ties = 0
    neg_below = 0
    i = 0
    n = s.shape[0]
    while i < n:
        j = i
        while j < n and s[j] == s[i]:
            j += 1
        group_pos = int(y[i:j].sum())
        group_neg = (j - i) - group_pos
        wins += group_pos * neg_below
        ties += group_pos * group_neg
        neg_below += group_neg
        i = j
    return (2 * wins + ties) / float(2 * num_pos * num_neg)
