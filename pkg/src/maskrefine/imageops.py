"""Box geometry and resampling helpers shared by the orchestration code."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PatchBox:
    """Axis-aligned box ``[top, top+height) x [left, left+width)``."""

    top: int
    left: int
    height: int
    width: int
    score: float = 0.0

    def __post_init__(self):
        if self.height <= 0 or self.width <= 0:
            raise ValueError("box height and width must be positive")
        if self.top < 0 or self.left < 0:
            raise ValueError("box must not start at negative coordinates")

    @property
    def bottom(self):
        return self.top + self.height

    @property
    def right(self):
        return self.left + self.width

    @property
    def area(self):
        return self.height * self.width

    @property
    def slices(self):
        return slice(self.top, self.bottom), slice(self.left, self.right)

    def within(self, height, width):
        return self.bottom <= height and self.right <= width

    def iou(self, other: "PatchBox") -> float:
        ih = min(self.bottom, other.bottom) - max(self.top, other.top)
        iw = min(self.right, other.right) - max(self.left, other.left)
        inter = max(ih, 0) * max(iw, 0)
        return inter / (self.area + other.area - inter)


def _source_index(n_out, n_in):
    # pixel-centre alignment: output i samples input floor((i + 0.5) * n_in / n_out)
    idx = np.floor((np.arange(n_out) + 0.5) * n_in / n_out).astype(np.int64)
    return np.minimum(idx, n_in - 1)


def resize_nearest(arr, shape):
    """Nearest-neighbour resample of the first two axes to ``shape``."""
    arr = np.asarray(arr)
    h, w = shape
    if arr.shape[:2] == (h, w):
        return arr.copy()
    rows = _source_index(h, arr.shape[0])
    cols = _source_index(w, arr.shape[1])
    return arr[rows][:, cols]


def _linear_weights(n_out, n_in):
    pos = (np.arange(n_out) + 0.5) * n_in / n_out - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def resize_bilinear(arr, shape):
    """Bilinear resample (half-pixel centres, edge clamped) of the first two axes."""
    arr = np.asarray(arr, dtype=np.float64)
    h, w = shape
    if arr.shape[:2] == (h, w):
        return arr.copy()
    r0, r1, fr = _linear_weights(h, arr.shape[0])
    c0, c1, fc = _linear_weights(w, arr.shape[1])
    extra = (None,) * (arr.ndim - 2)
    fr = fr[(slice(None), None) + extra]
    fc = fc[(None, slice(None)) + extra]
    # a + (b - a) * f keeps constant fields exactly constant
    top = arr[r0][:, c0] + (arr[r0][:, c1] - arr[r0][:, c0]) * fc
    bot = arr[r1][:, c0] + (arr[r1][:, c1] - arr[r1][:, c0]) * fc
    return top + (bot - top) * fr
