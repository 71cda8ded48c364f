"""Contrastive and grouped margin-ranking objectives with analytic gradients.

Gradients are returned alongside the losses so training needs no autodiff
and finite-difference checks can run against the same code path. Everything
accumulates in float64.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyGroupSide, EmptyPositives


@dataclass
class ContrastiveLoss:
    image_to_tag: float
    tag_to_image: float
    total: float


def _log_softmax(S: np.ndarray, axis: int) -> np.ndarray:
    shifted = S - S.max(axis=axis, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))


def _check_membership(S, M):
    S = np.asarray(S, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if S.shape != M.shape or S.ndim != 2:
        raise ValueError(f"S {S.shape} and M {M.shape} must be equal 2-D shapes")
    row_pos = M.sum(axis=1)
    if np.any(row_pos == 0):
        raise EmptyPositives(int(np.argmin(row_pos)), axis="row")
    col_pos = M.sum(axis=0)
    if not np.any(col_pos > 0):
        raise EmptyPositives(0, axis="column")
    return S, M, row_pos, col_pos


def contrastive_loss(S, M) -> ContrastiveLoss:
    """Symmetric InfoNCE-style loss over a similarity matrix.

    image->tag averages per-row log-softmax over each row's positives;
    tag->image is the columnwise mirror. Columns with no positive entry
    act as negatives only (they appear in row denominators but are skipped
    by the columnwise average), which is how hard-negative columns behave
    during training.
    """
    loss, _ = contrastive_loss_grad(S, M)
    return loss


def contrastive_loss_grad(S, M):
    """(ContrastiveLoss, dL_total/dS)."""
    S, M, row_pos, col_pos = _check_membership(S, M)
    B, N = S.shape

    logp = _log_softmax(S, axis=1)
    l_it = float(-np.mean((M * logp).sum(axis=1) / row_pos))

    used = col_pos > 0
    n_used = int(used.sum())
    logq = _log_softmax(S, axis=0)
    per_col = (M * logq).sum(axis=0)[used] / col_pos[used]
    l_ti = float(-np.sum(per_col) / n_used)

    total = 0.5 * (l_it + l_ti)

    P = np.exp(logp)
    G_it = (P - M / row_pos[:, None]) / B
    Q = np.exp(logq)
    G_ti = np.zeros_like(S)
    G_ti[:, used] = (Q[:, used] - M[:, used] / col_pos[used][None, :]) / n_used
    G = 0.5 * (G_it + G_ti)
    return ContrastiveLoss(l_it, l_ti, total), G


# --- grouped pairwise margin ranking with hard-negative mining -----------------


@dataclass
class RankGroup:
    """Scores for one image: positives vs candidate negatives.

    `neg_keys` (tag phrases) break score ties when selecting the
    hard-negative subset, keeping training and inference reproducible.
    """

    pos: np.ndarray
    neg: np.ndarray
    neg_keys: list | None = None

    def __post_init__(self):
        self.pos = np.atleast_1d(np.asarray(self.pos, dtype=np.float64))
        self.neg = np.atleast_1d(np.asarray(self.neg, dtype=np.float64))
        if self.pos.size == 0 or self.neg.size == 0:
            raise EmptyGroupSide("each group needs >=1 positive and >=1 negative")
        if self.neg_keys is not None and len(self.neg_keys) != self.neg.size:
            raise EmptyGroupSide("neg_keys length must match negatives")


def select_hard_negatives(group: RankGroup, ratio: float) -> np.ndarray:
    """Indices of the top-scoring max(1, floor(ratio*|N|)) negatives."""
    n = group.neg.size
    h = max(1, int(np.floor(ratio * n)))
    if group.neg_keys is not None:
        order = sorted(range(n), key=lambda j: (-group.neg[j], group.neg_keys[j]))
    else:
        order = sorted(range(n), key=lambda j: (-group.neg[j], j))
    return np.asarray(order[:h], dtype=int)


def ranker_loss(groups, margin: float, ratio: float) -> float:
    loss, _ = ranker_loss_grad(groups, margin, ratio)
    return loss


def ranker_loss_grad(groups, margin: float, ratio: float):
    """Mean-over-images of mean-over-(positive, hard negative) hinge.

    Returns (loss, per-group (g_pos, g_neg)) where gradients are with
    respect to the raw scores; negatives outside the hard subset get zero
    gradient. The hinge uses max(0, margin - (s_pos - s_neg)).
    """
    groups = list(groups)
    if not groups:
        raise EmptyGroupSide("no groups")
    n_groups = len(groups)
    total = 0.0
    grads = []
    for group in groups:
        hard = select_hard_negatives(group, ratio)
        diffs = margin - (group.pos[:, None] - group.neg[hard][None, :])
        hinge = np.maximum(diffs, 0.0)
        n_pairs = hinge.size
        total += float(hinge.sum()) / n_pairs
        viol = (diffs > 0).astype(np.float64)
        c = 1.0 / (n_groups * n_pairs)
        g_pos = -c * viol.sum(axis=1)
        g_neg = np.zeros_like(group.neg)
        g_neg[hard] = c * viol.sum(axis=0)
        grads.append((g_pos, g_neg))
    return total / n_groups, grads
