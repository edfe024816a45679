"""Stain-accuracy metrics over binary masks: Dice, IoU, Hausdorff distance,
TPR and TNR.

The Hausdorff distance is exact (Euclidean, over all positive pixel
centers) and computed via the two-pass exact distance transform in the
kernel lane, which matches the brute-force definition bit for bit. When
exactly one mask is empty the distance is reported as +inf; undefined
rates (empty denominator) are reported as NaN and excluded from
aggregates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch
from .raster import as_mask, check_same_shape

HAUSDORFF_INF = math.inf
UNDEFINED = math.nan


@dataclass(frozen=True)
class SegScore:
    dice: float
    iou: float
    hausdorff: float
    tpr: float
    tnr: float
    gt_positive: int
    pred_positive: int


def _pair(gt, pred):
    g = as_mask(gt)
    p = as_mask(pred)
    check_same_shape(g, p)
    return g, p


def dice(gt, pred) -> float:
    g, p = _pair(gt, pred)
    denom = int(g.sum()) + int(p.sum())
    if denom == 0:
        return 1.0  # both empty: perfect agreement convention
    return 2.0 * int(np.logical_and(g, p).sum()) / denom


def iou(gt, pred) -> float:
    g, p = _pair(gt, pred)
    union = int(np.logical_or(g, p).sum())
    if union == 0:
        return 1.0
    return int(np.logical_and(g, p).sum()) / union


def hausdorff(gt, pred) -> float:
    """Symmetric Hausdorff distance in pixels between positive-pixel sets."""
    g, p = _pair(gt, pred)
    g_any, p_any = bool(g.any()), bool(p.any())
    if not g_any and not p_any:
        return 0.0
    if g_any != p_any:
        return HAUSDORFF_INF
    d2_to_p = kernels.squared_edt(p)
    d2_to_g = kernels.squared_edt(g)
    h_gp = d2_to_p[g].max()
    h_pg = d2_to_g[p].max()
    return math.sqrt(max(h_gp, h_pg))


def tpr_tnr(gt, pred) -> tuple[float, float]:
    """(TP/(TP+FN), TN/(TN+FP)); NaN for an empty denominator."""
    g, p = _pair(gt, pred)
    positives = int(g.sum())
    negatives = g.size - positives
    tp = int(np.logical_and(g, p).sum())
    tn = int(np.logical_and(~g, ~p).sum())
    tpr = tp / positives if positives else UNDEFINED
    tnr = tn / negatives if negatives else UNDEFINED
    return tpr, tnr


def score_pair(gt, pred) -> SegScore:
    g, p = _pair(gt, pred)
    tpr, tnr = tpr_tnr(g, p)
    return SegScore(
        dice=dice(g, p),
        iou=iou(g, p),
        hausdorff=hausdorff(g, p),
        tpr=tpr,
        tnr=tnr,
        gt_positive=int(g.sum()),
        pred_positive=int(p.sum()),
    )


@dataclass(frozen=True)
class BatchResult:
    scores: list
    aggregate: dict
    excluded_empty_gt: int
    failures: list


def _finite_mean(values) -> float:
    vals = [v for v in values if math.isfinite(v)]
    return sum(vals) / len(vals) if vals else UNDEFINED


def score_batch(pairs, positives_only: bool = True) -> BatchResult:
    """Score (gt, pred) pairs; pairs with empty GT are excluded when
    positives_only (the default). Per-pair errors are collected, not raised.
    """
    scores = []
    excluded = 0
    failures = []
    for idx, (gt, pred) in enumerate(pairs):
        try:
            g = as_mask(gt)
            if positives_only and not g.any():
                excluded += 1
                continue
            scores.append(score_pair(g, pred))
        except Exception as e:  # per-pair failures never abort the batch
            failures.append((idx, repr(e)))
    aggregate = {
        name: _finite_mean(getattr(s, name) for s in scores)
        for name in ("dice", "iou", "hausdorff", "tpr", "tnr")
    }
    return BatchResult(scores=scores, aggregate=aggregate,
                       excluded_empty_gt=excluded, failures=failures)
