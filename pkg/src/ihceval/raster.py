"""Pixel-level primitives: grayscale, Otsu, thresholding, morphology,
connected components.

Rasters are plain NumPy arrays: RGB tiles are ``(H, W, 3) uint8``, gray
images ``(H, W) uint8`` and binary masks ``(H, W) bool``. The validators
below are used at API boundaries (file IO, CLI) so the numeric code can
assume well-formed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConstantImage, DimensionMismatch


def as_rgb(arr) -> np.ndarray:
    a = np.asarray(arr)
    if a.ndim != 3 or a.shape[2] != 3 or a.dtype != np.uint8:
        raise DimensionMismatch(
            f"expected (H, W, 3) uint8 RGB tile, got shape {a.shape} dtype {a.dtype}"
        )
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch("empty tile")
    return a


def as_gray(arr) -> np.ndarray:
    a = np.asarray(arr)
    if a.ndim != 2 or a.dtype != np.uint8:
        raise DimensionMismatch(
            f"expected (H, W) uint8 gray image, got shape {a.shape} dtype {a.dtype}"
        )
    return a


def as_mask(arr) -> np.ndarray:
    a = np.asarray(arr)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected (H, W) mask, got shape {a.shape}")
    return a.astype(bool, copy=False)


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class StructuringElement:
    """Boolean morphology footprint with an anchor position."""

    bits: np.ndarray
    anchor: tuple[int, int] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or not bits.any():
            raise ValueError("structuring element needs a 2-D footprint with >= 1 set bit")
        object.__setattr__(self, "bits", bits)
        anchor = self.anchor
        if anchor is None:
            anchor = ((bits.shape[0] - 1) // 2, (bits.shape[1] - 1) // 2)
        ar, ac = anchor
        if not (0 <= ar < bits.shape[0] and 0 <= ac < bits.shape[1]):
            raise ValueError(f"anchor {anchor} outside footprint {bits.shape}")
        object.__setattr__(self, "anchor", (int(ar), int(ac)))

    @classmethod
    def full(cls, height: int, width: int) -> "StructuringElement":
        return cls(np.ones((height, width), dtype=bool))


def to_grayscale(img) -> np.ndarray:
    """Luma conversion: round(0.299 R + 0.587 G + 0.114 B), clamped to u8."""
    rgb = as_rgb(img).astype(np.float64)
    lum = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.rint(lum), 0, 255).astype(np.uint8)


def otsu_threshold(img) -> int:
    """Threshold t in [0, 255] maximizing between-class variance of the
    histogram split {<= t} vs {> t}; smallest maximizer on ties.

    Raises ConstantImage when every pixel is identical.
    """
    gray = as_gray(img)
    if gray.size == 0:
        raise ConstantImage("empty image")
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    if np.count_nonzero(hist) < 2:
        raise ConstantImage("all pixels identical; no threshold separates classes")
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)                       # pixels <= t
    m0 = np.cumsum(hist * levels)              # intensity mass <= t
    mu_total = m0[-1]
    w1 = total - w0
    with np.errstate(invalid="ignore", divide="ignore"):
        mean0 = m0 / w0
        mean1 = (mu_total - m0) / w1
        var_between = w0 * w1 * (mean0 - mean1) ** 2
    var_between[~np.isfinite(var_between)] = 0.0
    return int(np.argmax(var_between))


def threshold_mask(img, t: int, keep_above: bool = True) -> np.ndarray:
    """Binary mask of pixels strictly above t (or <= t when keep_above=False)."""
    gray = as_gray(img)
    return gray > t if keep_above else gray <= t


def _se_passes(se: StructuringElement):
    """Separable decomposition for full rectangles (exact: a full h x w
    footprint is the Minkowski sum of its column and row segments, and the
    axis-aligned passes never clip contributing pixels)."""
    bits = se.bits
    h, w = bits.shape
    if h > 1 and w > 1 and bits.all():
        ar, ac = se.anchor
        return [
            (np.ones((h, 1), dtype=bool), (ar, 0)),
            (np.ones((1, w), dtype=bool), (0, ac)),
        ]
    return [(bits, se.anchor)]


def dilate(mask, se: StructuringElement, iterations: int = 1) -> np.ndarray:
    """Minkowski dilation repeated `iterations` times; outside pixels are False."""
    m = as_mask(mask)
    passes = _se_passes(se)
    for _ in range(iterations):
        for bits, anchor in passes:
            m = kernels.binary_dilate(m, bits, anchor)
    return m


def erode(mask, se: StructuringElement, iterations: int = 1) -> np.ndarray:
    m = as_mask(mask)
    passes = _se_passes(se)
    for _ in range(iterations):
        for bits, anchor in passes:
            m = kernels.binary_erode(m, bits, anchor)
    return m


@dataclass(frozen=True)
class Component:
    """One 8-connected component: tight box (x, y, w, h) and pixel area."""

    bounding_box: tuple[int, int, int, int]
    area: int


DEFAULT_MIN_AREA = 15_000


def connected_components(mask, min_area: int = 0) -> list[Component]:
    """8-connected components with area >= min_area, sorted by box (y, x)."""
    m = as_mask(mask)
    labels, count = kernels.label_components(m)
    if count == 0:
        return []
    rows, cols = np.nonzero(m)
    labs = labels[rows, cols]
    areas = np.bincount(labs, minlength=count + 1)
    x0 = np.full(count + 1, np.iinfo(np.int64).max)
    y0 = np.full(count + 1, np.iinfo(np.int64).max)
    x1 = np.full(count + 1, -1)
    y1 = np.full(count + 1, -1)
    np.minimum.at(x0, labs, cols)
    np.minimum.at(y0, labs, rows)
    np.maximum.at(x1, labs, cols)
    np.maximum.at(y1, labs, rows)
    comps = [
        Component(
            bounding_box=(int(x0[k]), int(y0[k]),
                          int(x1[k] - x0[k] + 1), int(y1[k] - y0[k] + 1)),
            area=int(areas[k]),
        )
        for k in range(1, count + 1)
        if areas[k] >= min_area
    ]
    comps.sort(key=lambda c: (c.bounding_box[1], c.bounding_box[0]))
    return comps
