"""Mask quality metrics: IoU, boundary accuracy / mBA and Boundary IoU.

All functions take binary masks of equal shape. Empty-versus-empty
comparisons score 1.
"""

import math

import numpy as np

from .core import as_mask, check_same_shape
from .morphology import contour, dilate, inner_band


def _pair(a, b, names=("a", "b")):
    a = as_mask(a, names[0]).astype(bool)
    b = as_mask(b, names[1]).astype(bool)
    check_same_shape((names[0], a), (names[1], b))
    return a, b


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def _diagonal(shape):
    return math.hypot(shape[0], shape[1])


def iou(a, b) -> float:
    a, b = _pair(a, b)
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def boundary_band(gt, r: int) -> np.ndarray:
    """Pixels within ``r`` of the ground-truth contour."""
    return dilate(contour(gt), r).astype(bool)


def boundary_accuracy(pred, gt, r: int) -> float:
    """Pixel accuracy of ``pred`` inside the radius-``r`` band around ``gt``'s contour."""
    if r < 1:
        raise ValueError("radius must be >= 1")
    pred, gt = _pair(pred, gt, ("pred", "gt"))
    band = boundary_band(gt.astype(np.uint8), r)
    n = np.count_nonzero(band)
    if n == 0:
        return 1.0
    return np.count_nonzero(pred[band] == gt[band]) / n


def mba_radii(shape):
    """Five radii from 3 px to 2% of the image diagonal, rounded and de-duplicated."""
    hi = max(3, _round_half_up(0.02 * _diagonal(shape)))
    radii = [_round_half_up(v) for v in np.linspace(3, hi, 5)]
    return sorted(set(radii))


def mba(pred, gt) -> float:
    """Mean boundary accuracy over :func:`mba_radii`."""
    pred, gt = _pair(pred, gt, ("pred", "gt"))
    return float(np.mean([boundary_accuracy(pred, gt, r) for r in mba_radii(gt.shape)]))


def boundary_iou(pred, gt, d=None) -> float:
    """IoU of the inner contour bands of width ``d``.

    ``d`` is in pixels; a value below 1 is read as a fraction of the image
    diagonal. The default is 2% of the diagonal (at least 1 px).
    """
    pred, gt = _pair(pred, gt, ("pred", "gt"))
    diag = _diagonal(gt.shape)
    if d is None:
        d = max(1, _round_half_up(0.02 * diag))
    elif d <= 0:
        raise ValueError("d must be positive")
    elif d < 1:
        d = max(1, _round_half_up(d * diag))
    d = int(d)
    bp = inner_band(pred.astype(np.uint8), d).astype(bool)
    bg = inner_band(gt.astype(np.uint8), d).astype(bool)
    union = np.count_nonzero(bp | bg)
    if union == 0:
        return 1.0
    return np.count_nonzero(bp & bg) / union
