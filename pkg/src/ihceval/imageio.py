"""Image and mask file IO.

Supported containers: PNG (8-bit RGB and 8-bit gray) and 8-bit TIFF
(uncompressed or deflate). Masks are single-channel PNGs with 0 = negative
and 255 = positive; any nonzero value maps to positive on read. All round
trips are lossless.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptFile, IoError, UnsupportedFormat
from .raster import as_gray, as_mask, as_rgb

_EXTENSIONS = {".png": "PNG", ".tif": "TIFF", ".tiff": "TIFF"}


def _format_for(path: str) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in _EXTENSIONS:
        raise UnsupportedFormat(f"unsupported image extension {ext!r} ({path})")
    return _EXTENSIONS[ext]


def _open(path: str) -> Image.Image:
    _format_for(path)
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError as e:
        raise IoError(str(e)) from e
    except UnidentifiedImageError as e:
        raise CorruptFile(f"cannot decode {path}: {e}") from e
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    return img


def read_image(path) -> np.ndarray:
    """Read an RGB tile as (H, W, 3) uint8; gray files are expanded to RGB."""
    img = _open(path)
    if img.mode not in ("RGB", "L"):
        img = img.convert("RGB")
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    return as_rgb(arr)


def write_image(path, img) -> None:
    fmt = _format_for(path)
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 3:
        arr = as_rgb(arr)
    else:
        arr = as_gray(arr)
    try:
        Image.fromarray(arr).save(path, format=fmt)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def read_gray(path) -> np.ndarray:
    img = _open(path)
    if img.mode != "L":
        img = img.convert("L")
    return np.asarray(img, dtype=np.uint8)


def read_mask(path) -> np.ndarray:
    """Read a binary mask; any nonzero value counts as positive."""
    return read_gray(path) != 0


def write_mask(path, mask) -> None:
    m = as_mask(mask)
    write_image(path, (m.astype(np.uint8) * 255))
