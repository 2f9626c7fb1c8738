"""Training objectives: link cross-entropy plus a positional-contrast term."""
from __future__ import annotations

import numpy as np

from .autodiff import Tensor, add, add_n, clamp, log, norm2, scale, sub, sum_all

__all__ = ["loss_lp", "loss_pe", "total_loss", "PROB_FLOOR"]

PROB_FLOOR = 1e-12


def _log_prob(p: Tensor) -> Tensor:
    return log(clamp(p, PROB_FLOOR, 1.0 - PROB_FLOOR))


def loss_lp(pos_probs: list[Tensor], neg_probs: list[Tensor]) -> Tensor:
    """-(1/2B) [sum log y+  +  sum log (1 - y-)], probabilities floored."""
    b = len(pos_probs)
    if b == 0 or len(neg_probs) != b:
        raise ValueError(
            f"need equal non-empty sides, got {b} positives, {len(neg_probs)} negatives"
        )
    terms = [_log_prob(p) for p in pos_probs]
    one = Tensor(np.ones(1))
    terms += [_log_prob(sub(one, p)) for p in neg_probs]
    return sum_all(scale(add_n(terms), -1.0 / (2.0 * b)))


def loss_pe(
    pos_pairs: list[tuple[Tensor, Tensor]],
    neg_pairs: list[tuple[Tensor, Tensor]],
    alpha_neg: float = 0.3,
) -> Tensor:
    """(1/B) [sum ||p~u+ - p~v+||  -  alpha_neg * sum ||p~u- - p~v-||].

    Attractive on observed pairs, repulsive on negatives; can be negative.
    """
    b = len(pos_pairs)
    if b == 0 or len(neg_pairs) != b:
        raise ValueError(
            f"need equal non-empty sides, got {b} positives, {len(neg_pairs)} negatives"
        )
    pos = add_n([norm2(sub(u, v)) for u, v in pos_pairs])
    neg = add_n([norm2(sub(u, v)) for u, v in neg_pairs])
    return scale(add(pos, scale(neg, -alpha_neg)), 1.0 / b)


def total_loss(l_lp: Tensor, l_pe: Tensor, alpha_pe: float = 0.5) -> Tensor:
    """(1 - alpha_pe) * link loss + alpha_pe * positional loss."""
    return add(scale(l_lp, 1.0 - alpha_pe), scale(l_pe, alpha_pe))
