"""Dataset construction: tissue bounding boxes, areas of interest, balanced
patch sampling, overlapping tile grids, and overlap-blended stitching with
seam diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (ConstantImage, ImageSmallerThanTile, InsufficientArea,
                     MissingTile, SizeMismatch)
from .raster import (Component, StructuringElement, as_mask, as_rgb,
                     connected_components, dilate, erode, otsu_threshold,
                     threshold_mask, to_grayscale, DEFAULT_MIN_AREA)
from .stains import StainBasis, dab_mask, DEFAULT_DAB_THRESHOLD

TISSUE_KERNEL = 20
TISSUE_ITERATIONS = 5
CONTEXT_SQUARE = 32
DEFAULT_TILE = 256
DEFAULT_OVERLAP = 192


@dataclass(frozen=True)
class AoiPair:
    """Positive (near stained pixels) and negative (unstained tissue) areas.

    positive_seed, when present, is the raw DAB-positive mask before the
    context-square dilation; positive patches are centered on seed pixels
    so each positive center is itself stained.
    """

    positive: np.ndarray
    negative: np.ndarray
    positive_seed: np.ndarray | None = None


@dataclass(frozen=True)
class PatchSpec:
    origin: tuple[int, int]  # (x, y)
    size: int
    polarity: str  # "positive" | "negative"


@dataclass(frozen=True)
class TileGrid:
    width: int
    height: int
    tile: int
    overlap: int
    origins: tuple[tuple[int, int], ...]


def tissue_boxes(img, min_area: int = DEFAULT_MIN_AREA,
                 kernel: int = TISSUE_KERNEL,
                 iterations: int = TISSUE_ITERATIONS) -> list[Component]:
    """Bounding boxes of tissue pieces on a slide image.

    Grayscale -> Otsu -> below-threshold foreground (tissue is darker than
    the white background) -> dilation then erosion -> components filtered
    by min_area. A constant slide has no separable foreground and yields
    an empty list.
    """
    gray = to_grayscale(as_rgb(img))
    try:
        t = otsu_threshold(gray)
    except ConstantImage:
        return []
    mask = threshold_mask(gray, t, keep_above=False)
    se = StructuringElement.full(kernel, kernel)
    mask = dilate(mask, se, iterations)
    mask = erode(mask, se, iterations)
    return connected_components(mask, min_area)


def areas_of_interest(ihc, basis: StainBasis | None = None,
                      dab_threshold: float = DEFAULT_DAB_THRESHOLD) -> AoiPair:
    """Positive AoI: union of 32x32 context squares centered on DAB-positive
    pixels. Negative AoI: refined bright-tissue mask minus the positive AoI.
    """
    rgb = as_rgb(ihc)
    # raw threshold (no cleanup) so the context square union stays exact
    positive_seed = dab_mask(rgb, basis, dab_threshold, cleanup=None)
    square = StructuringElement.full(CONTEXT_SQUARE, CONTEXT_SQUARE)
    positive = dilate(positive_seed, square) if positive_seed.any() \
        else positive_seed
    gray = to_grayscale(rgb)
    tissue = threshold_mask(gray, 127, keep_above=True)
    se = StructuringElement.full(TISSUE_KERNEL, TISSUE_KERNEL)
    tissue = erode(tissue, se, TISSUE_ITERATIONS)
    tissue = dilate(tissue, se, TISSUE_ITERATIONS)
    negative = tissue & ~positive
    return AoiPair(positive=positive, negative=negative,
                   positive_seed=positive_seed)


MAX_ATTEMPT_FACTOR = 10_000


def sample_patches(aoi: AoiPair, count_per_class: int, size: int,
                   seed: int = 0) -> list[PatchSpec]:
    """Uniformly sample patch origins whose center pixel lies in the matching
    AoI; exactly count_per_class per polarity, deterministic under seed.
    """
    rng = np.random.default_rng(seed)
    h, w = as_mask(aoi.positive).shape
    if size > w or size > h:
        raise InsufficientArea(f"patch size {size} exceeds image {w}x{h}")
    out: list[PatchSpec] = []
    half = size // 2
    positive_targets = (aoi.positive_seed if aoi.positive_seed is not None
                        else aoi.positive)
    for polarity, mask in (("positive", positive_targets),
                           ("negative", aoi.negative)):
        found = 0
        attempts = 0
        cap = MAX_ATTEMPT_FACTOR * max(count_per_class, 1)
        while found < count_per_class:
            if attempts >= cap:
                raise InsufficientArea(
                    f"could not place {count_per_class} {polarity} patches "
                    f"after {cap} attempts"
                )
            attempts += 1
            x = int(rng.integers(0, w - size + 1))
            y = int(rng.integers(0, h - size + 1))
            if mask[y + half, x + half]:
                out.append(PatchSpec(origin=(x, y), size=size,
                                     polarity=polarity))
                found += 1
    return out


def make_grid(width: int, height: int, tile: int = DEFAULT_TILE,
              overlap: int = DEFAULT_OVERLAP) -> TileGrid:
    """Sliding-window origins at stride tile-overlap, last row/column clamped
    flush with the image edge."""
    if tile <= overlap:
        raise ValueError(f"tile ({tile}) must exceed overlap ({overlap})")
    if width < tile or height < tile:
        raise ImageSmallerThanTile(
            f"image {width}x{height} smaller than tile {tile}"
        )
    stride = tile - overlap

    def axis_origins(dim: int) -> list[int]:
        xs = list(range(0, dim - tile + 1, stride))
        if xs[-1] != dim - tile:
            xs.append(dim - tile)
        return xs

    origins = tuple(
        (x, y) for y in axis_origins(height) for x in axis_origins(width)
    )
    return TileGrid(width=width, height=height, tile=tile, overlap=overlap,
                    origins=origins)


def extract_tiles(img, grid: TileGrid) -> list[tuple[tuple[int, int], np.ndarray]]:
    rgb = as_rgb(img)
    t = grid.tile
    return [((x, y), rgb[y:y + t, x:x + t].copy()) for x, y in grid.origins]


def _feather_profile(tile: int) -> np.ndarray:
    idx = np.arange(tile, dtype=np.float64)
    return np.minimum(idx + 1.0, tile - idx)


def stitch(tiles, grid: TileGrid, blend: str = "average") -> np.ndarray:
    """Recombine overlapping tiles onto the source canvas.

    Overlaps are combined by uniform averaging or by linear feathering
    toward tile centers; rounding is to nearest with ties to even.
    """
    if blend not in ("average", "feather"):
        raise ValueError(f"unknown blend mode {blend!r}")
    t = grid.tile
    provided = {tuple(origin): np.asarray(tile) for origin, tile in tiles}
    missing = [o for o in grid.origins if o not in provided]
    if missing:
        raise MissingTile(f"missing tiles at origins {missing[:8]}"
                          + ("..." if len(missing) > 8 else ""))
    if blend == "feather":
        prof = _feather_profile(t)
        weight_2d = prof[:, None] * prof[None, :]
    else:
        weight_2d = np.ones((t, t))
    num = np.zeros((grid.height, grid.width, 3))
    den = np.zeros((grid.height, grid.width))
    for x, y in grid.origins:
        tile = provided[(x, y)]
        if tile.shape != (t, t, 3):
            raise SizeMismatch(
                f"tile at ({x}, {y}) has shape {tile.shape}, expected {(t, t, 3)}"
            )
        num[y:y + t, x:x + t] += weight_2d[..., None] * tile.astype(np.float64)
        den[y:y + t, x:x + t] += weight_2d
    out = num / den[..., None]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def grid_to_dict(grid: TileGrid) -> dict:
    return {
        "width": grid.width,
        "height": grid.height,
        "tile": grid.tile,
        "overlap": grid.overlap,
        "origins": [[x, y] for x, y in grid.origins],
    }


def grid_from_dict(payload: dict) -> TileGrid:
    return TileGrid(
        width=int(payload["width"]),
        height=int(payload["height"]),
        tile=int(payload["tile"]),
        overlap=int(payload["overlap"]),
        origins=tuple((int(x), int(y)) for x, y in payload["origins"]),
    )


@dataclass(frozen=True)
class SeamReport:
    vertical: dict    # seam x -> mean |gradient| across the line
    horizontal: dict  # seam y -> mean |gradient| across the line
    max_seam: float
    mean_seam: float


def seam_report(img, grid: TileGrid) -> SeamReport:
    """Mean absolute grayscale gradient across each interior tile boundary."""
    gray = to_grayscale(as_rgb(img)).astype(np.float64)
    xs = sorted({x for x, _ in grid.origins if x > 0}
                | {x + grid.tile for x, _ in grid.origins
                   if 0 < x + grid.tile < grid.width})
    ys = sorted({y for _, y in grid.origins if y > 0}
                | {y + grid.tile for _, y in grid.origins
                   if 0 < y + grid.tile < grid.height})
    vertical = {x: float(np.mean(np.abs(gray[:, x] - gray[:, x - 1])))
                for x in xs}
    horizontal = {y: float(np.mean(np.abs(gray[y, :] - gray[y - 1, :])))
                  for y in ys}
    values = list(vertical.values()) + list(horizontal.values())
    return SeamReport(
        vertical=vertical,
        horizontal=horizontal,
        max_seam=max(values) if values else 0.0,
        mean_seam=float(np.mean(values)) if values else 0.0,
    )
