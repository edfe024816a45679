"""Evaluation toolkit for virtual immunohistochemistry staining.

Metric families: texture (MSE/PSNR/SSIM), stain accuracy over binary masks
(Dice/IoU/Hausdorff/TPR/TNR) and feature-distribution metrics (Frechet,
kernel distance, manifold precision/recall), plus the preprocessing,
tiling/stitching and statistics needed to run an evaluation end to end.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
