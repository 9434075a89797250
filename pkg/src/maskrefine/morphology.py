"""Binary morphology with square structuring elements.

Pixels beyond the frame count as background for dilation and as foreground
for erosion, which makes ``erode(m, r) == ~dilate(~m, r)`` hold exactly and
keeps the frame edge from reading as an object contour.
"""

import numpy as np
from scipy import ndimage

from .core import as_mask


def dilate(mask, r: int) -> np.ndarray:
    """Dilate by a ``(2r+1) x (2r+1)`` square."""
    mask = as_mask(mask)
    if r < 0:
        raise ValueError("radius must be >= 0")
    if r == 0:
        return mask.copy()
    return ndimage.maximum_filter(mask, size=2 * r + 1, mode="constant", cval=0)


def erode(mask, r: int) -> np.ndarray:
    """Erode by a ``(2r+1) x (2r+1)`` square."""
    mask = as_mask(mask)
    if r < 0:
        raise ValueError("radius must be >= 0")
    if r == 0:
        return mask.copy()
    return ndimage.minimum_filter(mask, size=2 * r + 1, mode="constant", cval=1)


def contour(mask) -> np.ndarray:
    """One-pixel inner contour: ``mask XOR erode(mask, 1)``."""
    mask = as_mask(mask)
    return mask ^ erode(mask, 1)


def inner_band(mask, d: int) -> np.ndarray:
    """Foreground pixels within ``d`` (Chebyshev) of the background."""
    mask = as_mask(mask)
    return mask & (1 - erode(mask, d))
