"""Hot raster kernels with a compiled (Cython) lane and a pure-NumPy lane.

The compiled extension is used when importable; set ``IHCEVAL_PURE_PYTHON=1``
to force the fallback. Both lanes are bit-identical (see tests/test_kernels).
"""

import os

from . import _pure

if os.environ.get("IHCEVAL_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
binary_dilate = _impl.binary_dilate
binary_erode = _impl.binary_erode
squared_edt = _impl.squared_edt
label_components = _impl.label_components

__all__ = [
    "BACKEND",
    "binary_dilate",
    "binary_erode",
    "squared_edt",
    "label_components",
]
