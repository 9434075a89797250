"""Coarse-mask synthesis from ground truth by random morphological corruption."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import RngStream, as_mask
from .metrics import iou
from .morphology import dilate, erode

__all__ = [
    "DegradeConfig",
    "DegradationError",
    "dilate",
    "erode",
    "perturb_boundary",
    "synthesize_coarse",
]


class DegradationError(RuntimeError):
    def __init__(self, message, best_iou=None):
        super().__init__(message)
        self.best_iou = best_iou


@dataclass(frozen=True)
class DegradeConfig:
    """Corruption parameters.

    Ranges left as ``None`` scale with the mask: morphology radius in
    ``[1, max(1, round(0.05 * min(H, W)))]`` and disc radius in
    ``[2, max(3, round(0.06 * min(H, W)))]``. All ranges are inclusive.
    """

    iou_min: float = 0.65
    iou_max: float = 0.85
    max_attempts: int = 200
    radius_range: Optional[Tuple[int, int]] = None
    points_range: Tuple[int, int] = (1, 10)
    disc_radius_range: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if not 0.0 < self.iou_min <= self.iou_max <= 1.0:
            raise ValueError("need 0 < iou_min <= iou_max <= 1")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        for name in ("radius_range", "points_range", "disc_radius_range"):
            rng = getattr(self, name)
            if rng is not None and not 0 <= rng[0] <= rng[1]:
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi")

    def morph_radii(self, shape):
        if self.radius_range is not None:
            return self.radius_range
        return 1, max(1, round(0.05 * min(shape)))

    def disc_radii(self, shape):
        if self.disc_radius_range is not None:
            return self.disc_radius_range
        return 2, max(3, round(0.06 * min(shape)))


def boundary_pixels(mask) -> np.ndarray:
    """Foreground pixels with a 4-neighbour inside the frame that is background."""
    m = as_mask(mask).astype(bool)
    p = np.pad(m, 1, constant_values=True)
    bg_near = ~p[:-2, 1:-1] | ~p[2:, 1:-1] | ~p[1:-1, :-2] | ~p[1:-1, 2:]
    return m & bg_near


def _disc(shape, row, col, radius):
    rr, cc = np.ogrid[:shape[0], :shape[1]]
    return (rr - row) ** 2 + (cc - col) ** 2 <= radius ** 2


def perturb_boundary(mask, K: int, radius_range, rng: RngStream) -> np.ndarray:
    """Paint discs at ``K`` random boundary pixels, each fore- or background with odds 1:1.

    Boundary pixels are chosen up front from the input mask, without
    replacement; ``K`` is clamped to the number available.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    mask = as_mask(mask)
    out = mask.copy()
    coords = np.argwhere(boundary_pixels(mask))
    K = min(K, len(coords))
    if K == 0:
        return out
    gen = rng.generator()
    picks = gen.choice(len(coords), size=K, replace=False)
    lo, hi = radius_range
    for idx in picks:
        radius = int(gen.integers(lo, hi + 1))
        value = int(gen.random() < 0.5)
        row, col = coords[idx]
        out[_disc(out.shape, row, col, radius)] = value
    return out


def _random_corruption(gt, config: DegradeConfig, rng: RngStream):
    gen = rng.generator()
    out = gt
    r_lo, r_hi = config.morph_radii(gt.shape)
    n_ops = int(gen.integers(1, 4))
    for k in range(n_ops):
        op = int(gen.integers(0, 3))
        if op == 0:
            out = dilate(out, int(gen.integers(r_lo, r_hi + 1)))
        elif op == 1:
            out = erode(out, int(gen.integers(r_lo, r_hi + 1)))
        else:
            lo, hi = config.points_range
            K = int(gen.integers(lo, hi + 1))
            out = perturb_boundary(out, K, config.disc_radii(gt.shape), rng.child(k))
    return out


def synthesize_coarse(gt, config: DegradeConfig = DegradeConfig(),
                      rng: RngStream = RngStream(0)) -> np.ndarray:
    """Corrupt ``gt`` until its IoU with the result falls inside the configured band.

    Attempt ``a`` draws from ``rng.child(a)``; the first hit is returned.
    Raises :class:`DegradationError` after ``max_attempts`` misses.
    """
    gt = as_mask(gt, "gt")
    if not gt.any():
        raise ValueError("gt must have non-empty foreground")
    best = None
    for attempt in range(config.max_attempts):
        cand = _random_corruption(gt, config, rng.child(attempt))
        score = iou(gt, cand)
        if config.iou_min <= score <= config.iou_max:
            return cand
        if best is None or _band_distance(score, config) < _band_distance(best, config):
            best = score
    raise DegradationError(
        f"no corruption within IoU band [{config.iou_min}, {config.iou_max}] after "
        f"{config.max_attempts} attempts (closest IoU {best:.4f})",
        best_iou=best,
    )


def _band_distance(score, config):
    return max(config.iou_min - score, score - config.iou_max, 0.0)
