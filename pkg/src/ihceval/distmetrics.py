"""Feature-distribution metrics between real and generated embedding sets:
Frechet (Gaussian-fit) distance, kernel distance (polynomial MMD^2), and
k-NN manifold precision/recall, plus a deterministic toy encoder for
self-contained tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (DimensionMismatch, KTooLarge, NumericalFailure,
                     TooFewSamples)
from .raster import as_rgb, to_grayscale
from .stains import StainBasis, deconvolve

TOY_ENCODER_TAG = "toy-v1"
TOY_DIM = 64


@dataclass(frozen=True)
class FeatureSet:
    """N x d matrix of embeddings, one row per image."""

    data: np.ndarray
    encoder_tag: str = ""
    ids: tuple[str, ...] | None = None

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionMismatch(f"feature set must be (n, d) with n,d >= 1, got {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("feature set contains NaN/Inf")
        if self.ids is not None and len(self.ids) != a.shape[0]:
            raise DimensionMismatch("ids length must equal the row count")
        object.__setattr__(self, "data", a)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class GaussianMoments:
    mean: np.ndarray
    cov: np.ndarray


def moments(fs: FeatureSet) -> GaussianMoments:
    """Sample mean and covariance (1/(n-1) normalization)."""
    if fs.n < 2:
        raise TooFewSamples("moments need n >= 2")
    mean = fs.data.mean(axis=0)
    cov = np.cov(fs.data, rowvar=False, ddof=1).reshape(fs.d, fs.d)
    return GaussianMoments(mean=mean, cov=cov)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: GaussianMoments, b: GaussianMoments) -> float:
    """||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).

    The cross square root is evaluated through the symmetric form
    sqrt(S_a) S_b sqrt(S_a), whose eigenvalues (clamped at zero) have the
    same trace as sqrt(S_a S_b).
    """
    if a.mean.shape != b.mean.shape or a.cov.shape != b.cov.shape:
        raise DimensionMismatch("moment dimensions differ")
    try:
        sqrt_a = _psd_sqrt(a.cov)
        inner = sqrt_a @ b.cov @ sqrt_a
        inner = (inner + inner.T) / 2.0
        cross_eigs = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"eigendecomposition failed: {e}") from e
    diff = a.mean - b.mean
    value = (diff @ diff + np.trace(a.cov) + np.trace(b.cov)
             - 2.0 * np.sum(np.sqrt(cross_eigs)))
    return float(max(value, 0.0))


def _poly_kernel(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    return (u @ v.T / d + 1.0) ** 3


def _mmd2(x: np.ndarray, y: np.ndarray, unbiased: bool) -> float:
    kxx = _poly_kernel(x, x)
    kyy = _poly_kernel(y, y)
    kxy = _poly_kernel(x, y)
    n, m = len(x), len(y)
    if unbiased:
        term_x = (kxx.sum() - np.trace(kxx)) / (n * (n - 1))
        term_y = (kyy.sum() - np.trace(kyy)) / (m * (m - 1))
    else:
        term_x = kxx.mean()
        term_y = kyy.mean()
    return float(term_x + term_y - 2.0 * kxy.mean())


def kernel_distance(x: FeatureSet, y: FeatureSet, estimator: str = "unbiased",
                    subsets: tuple[int, int, int] | None = None) -> float:
    """MMD^2 with the degree-3 polynomial kernel k(u,v) = (u.v/d + 1)^3.

    `subsets` = (count, size, seed) averages the estimator over seeded
    random subsets drawn without replacement from each side.
    """
    if x.d != y.d:
        raise DimensionMismatch(f"feature dims differ: {x.d} vs {y.d}")
    if estimator not in ("biased", "unbiased"):
        raise ValueError(f"unknown estimator {estimator!r}")
    unbiased = estimator == "unbiased"
    if unbiased and (x.n < 2 or y.n < 2):
        raise TooFewSamples("unbiased estimator needs n >= 2 on both sides")
    if subsets is None:
        return _mmd2(x.data, y.data, unbiased)
    count, size, seed = subsets
    size = min(size, x.n, y.n)
    if unbiased and size < 2:
        raise TooFewSamples("subset size < 2 for the unbiased estimator")
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(count):
        xi = x.data[rng.choice(x.n, size=size, replace=False)]
        yi = y.data[rng.choice(y.n, size=size, replace=False)]
        values.append(_mmd2(xi, yi, unbiased))
    return float(np.mean(values))


@dataclass(frozen=True)
class ManifoldIndex:
    """k-NN neighborhood radii of a reference embedding set."""

    points: np.ndarray
    k: int
    radii: np.ndarray

    @classmethod
    def build(cls, points: np.ndarray, k: int) -> "ManifoldIndex":
        n = len(points)
        if k >= n:
            raise KTooLarge(f"k={k} must be < n={n}")
        if k < 1:
            raise ValueError("k must be >= 1")
        dists = cdist(points, points)
        # column 0 of the sort is the self distance (0); column k is the
        # distance to the k-th nearest *other* point
        radii = np.sort(dists, axis=1)[:, k]
        return cls(points=points, k=k, radii=radii)

    def covers(self, queries: np.ndarray) -> np.ndarray:
        """For each query, is it within the radius ball of any point."""
        d = cdist(queries, self.points)
        return (d <= self.radii[None, :]).any(axis=1)

    def covered_by(self, others: np.ndarray) -> np.ndarray:
        """For each indexed point, does its ball contain any of `others`."""
        d = cdist(self.points, others)
        return (d <= self.radii[:, None]).any(axis=1)


def precision_recall(real: FeatureSet, gen: FeatureSet, k: int = 3
                     ) -> tuple[float, float]:
    """Manifold precision and recall of `gen` against `real`.

    The manifold is estimated on the real set (ball radius = distance to the
    k-th nearest other real point). Precision is the fraction of generated
    points inside some real ball; recall is the fraction of real points
    whose ball contains at least one generated point.
    """
    if real.d != gen.d:
        raise DimensionMismatch(f"feature dims differ: {real.d} vs {gen.d}")
    index = ManifoldIndex.build(real.data, k)
    precision = float(index.covers(gen.data).mean())
    recall = float(index.covered_by(gen.data).mean())
    return precision, recall


def toy_encoder(img, basis: StainBasis | None = None) -> np.ndarray:
    """Deterministic 64-d embedding for self-contained pipeline tests.

    Blocks: 16-bin grayscale histogram, 16-bin DAB-concentration histogram
    (clamped to [0, 2]), and an 8x4 mean-pooled grayscale thumbnail; each
    block normalized to unit sum.
    """
    rgb = as_rgb(img)
    gray = to_grayscale(rgb).astype(np.float64)
    gray_hist = np.bincount((gray.astype(np.intp) // 16).ravel(), minlength=16
                            ).astype(np.float64)[:16]
    dab = np.clip(deconvolve(rgb, basis)[..., 2], 0.0, 2.0)
    dab_bins = np.minimum((dab / 2.0 * 16).astype(np.intp), 15)
    dab_hist = np.bincount(dab_bins.ravel(), minlength=16).astype(np.float64)[:16]
    row_bands = np.array_split(gray, 4, axis=0)
    thumb = np.array([
        [band.mean() for band in np.array_split(rows, 8, axis=1)]
        for rows in row_bands
    ]).ravel()
    blocks = []
    for block in (gray_hist, dab_hist, thumb):
        s = block.sum()
        blocks.append(block / s if s > 0 else block)
    return np.concatenate(blocks)
