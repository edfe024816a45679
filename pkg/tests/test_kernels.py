"""The compiled and pure kernel lanes must be bit-identical."""

import numpy as np
import pytest

from ihceval.kernels import _pure

try:
    from ihceval.kernels import _fast
except ImportError:
    _fast = None

from conftest import random_mask

needs_fast = pytest.mark.skipif(_fast is None,
                                reason="compiled kernels not built")


@needs_fast
@pytest.mark.parametrize("trial", range(20))
def test_morphology_lanes_agree(trial):
    rng = np.random.default_rng(trial)
    mask = random_mask(rng, 24, 31, p=rng.uniform(0.1, 0.9))
    sh, sw = rng.integers(1, 6, size=2)
    se = random_mask(rng, sh, sw, p=0.6)
    if not se.any():
        se[0, 0] = True
    anchor = (int(rng.integers(0, sh)), int(rng.integers(0, sw)))
    np.testing.assert_array_equal(
        _pure.binary_dilate(mask, se, anchor),
        _fast.binary_dilate(mask, se, anchor))
    np.testing.assert_array_equal(
        _pure.binary_erode(mask, se, anchor),
        _fast.binary_erode(mask, se, anchor))


@needs_fast
@pytest.mark.parametrize("trial", range(20))
def test_edt_lanes_agree(trial):
    rng = np.random.default_rng(100 + trial)
    mask = random_mask(rng, 30, 22, p=rng.uniform(0.0, 0.5))
    np.testing.assert_array_equal(_pure.squared_edt(mask),
                                  _fast.squared_edt(mask))


@needs_fast
@pytest.mark.parametrize("trial", range(20))
def test_labelling_lanes_agree(trial):
    rng = np.random.default_rng(200 + trial)
    mask = random_mask(rng, 25, 25, p=rng.uniform(0.2, 0.7))
    labels_pure, n_pure = _pure.label_components(mask)
    labels_fast, n_fast = _fast.label_components(mask)
    assert n_pure == n_fast
    np.testing.assert_array_equal(labels_pure, labels_fast)


def test_edt_empty_and_full():
    empty = np.zeros((4, 4), dtype=bool)
    assert np.all(np.isinf(_pure.squared_edt(empty)))
    full = np.ones((4, 4), dtype=bool)
    assert np.all(_pure.squared_edt(full) == 0)


def test_edt_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(10):
        mask = random_mask(rng, 12, 14, p=0.3)
        if not mask.any():
            continue
        got = _pure.squared_edt(mask)
        pts = np.argwhere(mask)
        for r in range(mask.shape[0]):
            for c in range(mask.shape[1]):
                want = min((r - pr) ** 2 + (c - pc) ** 2 for pr, pc in pts)
                assert got[r, c] == want
