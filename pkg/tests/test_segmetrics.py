import math

import numpy as np
import pytest

from ihceval import segmetrics
from ihceval.errors import DimensionMismatch

from conftest import random_mask


def brute_force_oracle(gt, pred):
    """O(n^2) per-definition segmentation metrics."""
    g = {(r, c) for r, c in zip(*np.nonzero(gt))}
    p = {(r, c) for r, c in zip(*np.nonzero(pred))}
    total = gt.size
    inter = len(g & p)
    union = len(g | p)
    dice = 2 * inter / (len(g) + len(p)) if (g or p) else 1.0
    iou = inter / union if union else 1.0
    if not g and not p:
        hd = 0.0
    elif not g or not p:
        hd = math.inf
    else:
        def directed(a, b):
            return max(min(math.dist(x, y) for y in b) for x in a)
        hd = max(directed(g, p), directed(p, g))
    tp = inter
    tn = total - union
    tpr = tp / len(g) if g else math.nan
    tnr = tn / (total - len(g)) if total > len(g) else math.nan
    return dice, iou, hd, tpr, tnr


class TestDice:
    def test_identical(self, rng):
        m = random_mask(rng)
        m[0, 0] = True
        assert segmetrics.dice(m, m) == 1.0

    def test_disjoint(self):
        a = np.zeros((4, 4), dtype=bool)
        b = np.zeros((4, 4), dtype=bool)
        a[0], b[2] = True, True
        assert segmetrics.dice(a, b) == 0.0

    def test_half_overlap_rows(self):
        gt = np.zeros((4, 4), dtype=bool)
        pred = np.zeros((4, 4), dtype=bool)
        gt[0:2] = True
        pred[1:3] = True
        assert segmetrics.dice(gt, pred) == 0.5

    def test_both_empty_convention(self):
        empty = np.zeros((3, 3), dtype=bool)
        assert segmetrics.dice(empty, empty) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            segmetrics.dice(np.zeros((2, 2), bool), np.zeros((2, 3), bool))


class TestIou:
    def test_identical(self, rng):
        m = random_mask(rng)
        m[0, 0] = True
        assert segmetrics.iou(m, m) == 1.0

    def test_half_overlap_rows(self):
        gt = np.zeros((4, 4), dtype=bool)
        pred = np.zeros((4, 4), dtype=bool)
        gt[0:2] = True
        pred[1:3] = True
        assert segmetrics.iou(gt, pred) == pytest.approx(1 / 3, abs=1e-9)

    def test_disjoint(self):
        a = np.zeros((4, 4), dtype=bool)
        b = np.zeros((4, 4), dtype=bool)
        a[0], b[2] = True, True
        assert segmetrics.iou(a, b) == 0.0


class TestHausdorff:
    def test_single_pixels(self):
        a = np.zeros((8, 8), dtype=bool)
        b = np.zeros((8, 8), dtype=bool)
        a[0, 0] = True
        b[3, 4] = True  # 3-4-5 triangle
        assert segmetrics.hausdorff(a, b) == 5.0

    def test_identical(self, rng):
        m = random_mask(rng)
        m[0, 0] = True
        assert segmetrics.hausdorff(m, m) == 0.0

    def test_one_empty_is_inf(self):
        a = np.zeros((4, 4), dtype=bool)
        b = np.zeros((4, 4), dtype=bool)
        a[1, 1] = True
        assert math.isinf(segmetrics.hausdorff(a, b))

    def test_both_empty_is_zero(self):
        empty = np.zeros((4, 4), dtype=bool)
        assert segmetrics.hausdorff(empty, empty) == 0.0

    def test_superset_distance(self):
        # gt inside pred; distance set by pred's farthest pixel from gt
        gt = np.zeros((16, 16), dtype=bool)
        pred = np.zeros((16, 16), dtype=bool)
        gt[8, 8] = True
        pred[8, 8] = True
        pred[8, 2] = True  # 6 pixels away
        assert segmetrics.hausdorff(gt, pred) == 6.0

    def test_symmetry(self, rng):
        for _ in range(10):
            a, b = random_mask(rng), random_mask(rng)
            assert segmetrics.hausdorff(a, b) == segmetrics.hausdorff(b, a)


class TestTprTnr:
    def test_identical(self, rng):
        m = random_mask(rng)
        m[0, 0], m[1, 1] = True, False
        assert segmetrics.tpr_tnr(m, m) == (1.0, 1.0)

    def test_complement(self, rng):
        m = random_mask(rng)
        m[0, 0], m[1, 1] = True, False
        assert segmetrics.tpr_tnr(m, ~m) == (0.0, 0.0)

    def test_half_overlap_rows(self):
        gt = np.zeros((4, 4), dtype=bool)
        pred = np.zeros((4, 4), dtype=bool)
        gt[0:2] = True
        pred[1:3] = True
        assert segmetrics.tpr_tnr(gt, pred) == (0.5, 0.5)

    def test_undefined_is_nan(self):
        empty = np.zeros((3, 3), dtype=bool)
        full = np.ones((3, 3), dtype=bool)
        tpr, tnr = segmetrics.tpr_tnr(empty, empty)
        assert math.isnan(tpr) and tnr == 1.0
        tpr, tnr = segmetrics.tpr_tnr(full, full)
        assert tpr == 1.0 and math.isnan(tnr)

    def test_complement_duality(self, rng):
        gt, pred = random_mask(rng), random_mask(rng)
        gt[0, 0], gt[1, 1] = True, False
        tpr, _ = segmetrics.tpr_tnr(gt, pred)
        _, tnr = segmetrics.tpr_tnr(~gt, ~pred)
        assert tpr == tnr


class TestAgainstOracle:
    @pytest.mark.parametrize("trial", range(30))
    def test_random_pairs(self, trial):
        rng = np.random.default_rng(trial)
        h, w = rng.integers(2, 20, size=2)
        gt = random_mask(rng, h, w, p=rng.uniform(0, 0.8))
        pred = random_mask(rng, h, w, p=rng.uniform(0, 0.8))
        want = brute_force_oracle(gt, pred)
        score = segmetrics.score_pair(gt, pred)
        got = (score.dice, score.iou, score.hausdorff, score.tpr, score.tnr)
        for g, o in zip(got, want):
            if math.isnan(o):
                assert math.isnan(g)
            else:
                assert g == o

    def test_dice_iou_identity(self, rng):
        for _ in range(50):
            gt, pred = random_mask(rng), random_mask(rng)
            d = segmetrics.dice(gt, pred)
            j = segmetrics.iou(gt, pred)
            assert d == pytest.approx(2 * j / (1 + j), abs=1e-12)

    def test_translation_invariance(self, rng):
        gt = np.zeros((20, 20), dtype=bool)
        pred = np.zeros((20, 20), dtype=bool)
        gt[4:9, 4:9] = random_mask(rng, 5, 5)
        pred[4:9, 4:9] = random_mask(rng, 5, 5)
        shifted_gt = np.roll(gt, (5, 3), axis=(0, 1))
        shifted_pred = np.roll(pred, (5, 3), axis=(0, 1))
        a = segmetrics.score_pair(gt, pred)
        b = segmetrics.score_pair(shifted_gt, shifted_pred)
        assert (a.dice, a.iou, a.hausdorff, a.tpr, a.tnr) == \
               (b.dice, b.iou, b.hausdorff, b.tpr, b.tnr)


class TestBatch:
    def test_positives_only_exclusion(self, rng):
        full = np.ones((4, 4), dtype=bool)
        empty = np.zeros((4, 4), dtype=bool)
        result = segmetrics.score_batch(
            [(full, full), (empty, full), (full, empty)])
        assert len(result.scores) == 2
        assert result.excluded_empty_gt == 1

    def test_identical_masks_aggregate(self, rng):
        m = random_mask(rng)
        m[0, 0] = True
        result = segmetrics.score_batch([(m, m)] * 3)
        assert result.aggregate["dice"] == 1.0

    def test_aggregate_is_mean(self, rng):
        pairs = []
        for _ in range(5):
            gt, pred = random_mask(rng), random_mask(rng)
            gt[0, 0] = True
            pairs.append((gt, pred))
        result = segmetrics.score_batch(pairs, positives_only=False)
        manual = np.mean([s.dice for s in result.scores])
        assert result.aggregate["dice"] == pytest.approx(manual, abs=1e-12)

    def test_per_pair_errors_collected(self, rng):
        good = random_mask(rng)
        good[0, 0] = True
        bad = random_mask(rng, 8, 9)
        result = segmetrics.score_batch([(good, good), (good, bad)])
        assert len(result.scores) == 1
        assert len(result.failures) == 1
