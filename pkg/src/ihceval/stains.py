"""Stain color deconvolution (hematoxylin / eosin / DAB) and DAB masking.

RGB intensities are mapped to optical density with OD = -log10((I+1)/256)
(the +1 avoids log(0) for black pixels), unmixed through a 3x3 stain basis
into per-stain concentrations, and the DAB channel is thresholded to form
stain-positive masks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularBasis
from .raster import StructuringElement, as_rgb, dilate, erode

# Ruifrok-Johnston absorbance vectors for H, E and DAB (rows normalized in
# the constructor).
DEFAULT_BASIS_ROWS = (
    (0.650, 0.704, 0.286),
    (0.072, 0.990, 0.105),
    (0.268, 0.570, 0.776),
)

DEFAULT_DAB_THRESHOLD = 0.15

STAIN_NAMES = ("H", "E", "DAB")


@dataclass(frozen=True)
class StainBasis:
    """3x3 optical-density stain matrix; rows are unit H/E/DAB vectors."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError(f"stain basis must be 3x3, got {m.shape}")
        norms = np.linalg.norm(m, axis=1)
        if np.any(norms <= 0):
            raise SingularBasis("stain basis has a zero row")
        m = m / norms[:, None]
        if abs(np.linalg.det(m)) < 1e-8:
            raise SingularBasis("stain basis is numerically singular")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def default(cls) -> "StainBasis":
        return cls(np.array(DEFAULT_BASIS_ROWS))

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)


@dataclass(frozen=True)
class MorphologySpec:
    """Post-threshold mask cleanup: a sequence of morphology passes."""

    operations: tuple[str, ...] = ("dilate",)
    kernel: int = 3
    iterations: int = 1

    def apply(self, mask: np.ndarray) -> np.ndarray:
        se = StructuringElement.full(self.kernel, self.kernel)
        out = mask
        for op in self.operations:
            if op == "dilate":
                out = dilate(out, se, self.iterations)
            elif op == "erode":
                out = erode(out, se, self.iterations)
            else:
                raise ValueError(f"unknown morphology operation {op!r}")
        return out


def rgb_to_od(img) -> np.ndarray:
    """Per-pixel optical densities, (H, W, 3) float64 in [0, log10(256)]."""
    rgb = as_rgb(img).astype(np.float64)
    return -np.log10((rgb + 1.0) / 256.0)


def deconvolve(img, basis: StainBasis | None = None) -> np.ndarray:
    """Unmix a tile into (H, W, 3) float64 concentrations (h, e, dab).

    Out-of-gamut pixels may yield slightly negative concentrations; they are
    preserved here and only clamped on reconstruction.
    """
    basis = basis or StainBasis.default()
    od = rgb_to_od(img)
    return od @ basis.inverse


def reconstruct(stains, basis: StainBasis | None = None,
                keep=STAIN_NAMES) -> np.ndarray:
    """Map concentrations back to an RGB tile, keeping only the named stains."""
    basis = basis or StainBasis.default()
    conc = np.clip(np.asarray(stains, dtype=np.float64), 0.0, None)
    keep_idx = [i for i, name in enumerate(STAIN_NAMES) if name in keep]
    kept = np.zeros_like(conc)
    if keep_idx:
        kept[..., keep_idx] = conc[..., keep_idx]
    od = kept @ basis.matrix
    rgb = 256.0 * np.power(10.0, -od) - 1.0
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def dab_mask(img, basis: StainBasis | None = None,
             dab_threshold: float = DEFAULT_DAB_THRESHOLD,
             cleanup: MorphologySpec | None = MorphologySpec()) -> np.ndarray:
    """DAB-positive mask: deconvolved dab concentration > threshold, then the
    configured morphological cleanup (default one 3x3 dilation)."""
    if dab_threshold <= 0:
        raise ValueError("dab_threshold must be > 0")
    conc = deconvolve(img, basis)
    mask = conc[..., 2] > dab_threshold
    if cleanup is not None:
        mask = cleanup.apply(mask)
    return mask
