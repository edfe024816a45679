"""Pixel-aligned texture fidelity metrics: MSE, PSNR and SSIM.

MSE is the per-channel mean of squared differences (i.e. the squared-norm
sum divided by 3*m*n), which keeps PSNR's 255^2 peak consistent with 8-bit
channels. PSNR of identical images is reported as +inf and excluded from
aggregates downstream. SSIM is computed on grayscale over valid window
positions only (no padding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, TooSmall
from .raster import as_rgb, check_same_shape, to_grayscale

PSNR_INF = math.inf


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    window_kind: str = "gaussian"  # "uniform" or "gaussian"
    sigma: float = 1.5
    c1: float = (0.01 * 255) ** 2
    c2: float = (0.03 * 255) ** 2

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("SSIM window must be odd and >= 3")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("SSIM stabilizers must be positive")
        if self.window_kind not in ("uniform", "gaussian"):
            raise ValueError(f"unknown window kind {self.window_kind!r}")

    def kernel_1d(self) -> np.ndarray:
        if self.window_kind == "uniform":
            k = np.ones(self.window)
        else:
            r = np.arange(self.window) - (self.window - 1) / 2
            k = np.exp(-(r * r) / (2.0 * self.sigma * self.sigma))
        return k / k.sum()


@dataclass(frozen=True)
class TextureScore:
    mse: float
    psnr: float
    ssim: float


def mse(real, virt) -> float:
    a = as_rgb(real)
    b = as_rgb(virt)
    check_same_shape(a, b)
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(real, virt) -> float:
    m = mse(real, virt)
    if m == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(255.0 ** 2 / m)


def _window_means(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    out = correlate1d(img, k, axis=0, mode="constant")
    out = correlate1d(out, k, axis=1, mode="constant")
    r = (len(k) - 1) // 2
    return out[r:img.shape[0] - r, r:img.shape[1] - r]


def ssim(real, virt, params: SsimParams | None = None) -> float:
    """Mean SSIM over all valid window positions of the grayscale images."""
    params = params or SsimParams()
    a = as_rgb(real)
    b = as_rgb(virt)
    check_same_shape(a, b)
    if min(a.shape[0], a.shape[1]) < params.window:
        raise TooSmall(
            f"image {a.shape[:2]} smaller than SSIM window {params.window}"
        )
    x = to_grayscale(a).astype(np.float64)
    y = to_grayscale(b).astype(np.float64)
    k = params.kernel_1d()
    mu_x = _window_means(x, k)
    mu_y = _window_means(y, k)
    var_x = _window_means(x * x, k) - mu_x * mu_x
    var_y = _window_means(y * y, k) - mu_y * mu_y
    cov = _window_means(x * y, k) - mu_x * mu_y
    c1, c2 = params.c1, params.c2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def score_pair(real, virt, params: SsimParams | None = None) -> TextureScore:
    return TextureScore(mse=mse(real, virt), psnr=psnr(real, virt),
                        ssim=ssim(real, virt, params))
