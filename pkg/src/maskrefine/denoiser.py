"""Denoiser contract and the analytic oracle denoiser.

A denoiser is any object with

* ``predict(image, mask_t, t) -> DenoiserOutput`` where ``image`` is
  ``(H, W, C)`` float, ``mask_t`` the current ``(H, W)`` mask and ``t`` the
  step being reversed;
* ``input_size``: the square side it prefers (used by the crop/resize
  orchestration);
* ``for_region(box, shape)``: a denoiser to use on the crop ``box`` of the
  full frame resampled to ``shape``. Image-driven models return
  themselves; the oracle returns one holding the matching crop of its
  ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .core import RngStream, as_image, as_mask, as_probability_map, check_same_shape
from .imageops import resize_nearest


@dataclass(frozen=True)
class DenoiserOutput:
    predicted_fine: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "predicted_fine", as_mask(self.predicted_fine, "predicted_fine"))
        object.__setattr__(self, "confidence", as_probability_map(self.confidence, "confidence"))
        check_same_shape(("predicted_fine", self.predicted_fine), ("confidence", self.confidence))


class Denoiser(Protocol):
    input_size: int

    def predict(self, image: np.ndarray, mask_t: np.ndarray, t: int) -> DenoiserOutput: ...

    def for_region(self, box, shape) -> "Denoiser": ...


def denoise(denoiser, image, mask_t, t: int) -> DenoiserOutput:
    """Validate inputs, call the denoiser and check its output dimensions."""
    image = as_image(image)
    mask_t = as_mask(mask_t, "mask_t")
    check_same_shape(("image", image), ("mask_t", mask_t))
    out = denoiser.predict(image, mask_t, int(t))
    check_same_shape(("mask_t", mask_t), ("predicted_fine", out.predicted_fine))
    return out


class OracleDenoiser:
    """Returns the ground truth (optionally corrupted) with a fixed confidence.

    With ``error_rate > 0`` each call flips a fresh random subset of pixels,
    each independently with probability ``error_rate``; the flips of call
    ``k`` come from ``RngStream(seed, (k,))`` so a run is reproducible.
    """

    def __init__(self, ground_truth, confidence_level=1.0, error_rate=0.0, seed=0,
                 input_size=None):
        self.ground_truth = as_mask(ground_truth, "ground_truth")
        if not 0.0 <= confidence_level <= 1.0:
            raise ValueError("confidence_level must lie in [0, 1]")
        if not 0.0 <= error_rate <= 1.0:
            raise ValueError("error_rate must lie in [0, 1]")
        self.confidence_level = float(confidence_level)
        self.error_rate = float(error_rate)
        self.seed = int(seed)
        self.input_size = int(input_size or max(self.ground_truth.shape))
        self.calls = 0

    def predict(self, image, mask_t, t):
        mask_t = np.asarray(mask_t)
        if mask_t.shape != self.ground_truth.shape:
            raise ValueError(
                f"oracle holds ground truth of shape {self.ground_truth.shape}, "
                f"got mask of shape {mask_t.shape}; use for_region()"
            )
        pred = self.ground_truth.copy()
        if self.error_rate > 0.0:
            flip = RngStream(self.seed, (self.calls,)).uniform(pred.shape) < self.error_rate
            pred[flip] ^= 1
        self.calls += 1
        conf = np.full(pred.shape, self.confidence_level)
        return DenoiserOutput(pred, conf)

    def for_region(self, box, shape):
        crop = self.ground_truth[box.top:box.top + box.height, box.left:box.left + box.width]
        seed = (self.seed * 1_000_003 + box.top * 7919 + box.left) % 2**63
        return OracleDenoiser(resize_nearest(crop, shape), self.confidence_level,
                              self.error_rate, seed, input_size=self.input_size)


class IdentityDenoiser:
    """Echoes the input mask with full confidence (a fixed point of refinement)."""

    def __init__(self, input_size=64):
        self.input_size = input_size

    def predict(self, image, mask_t, t):
        return DenoiserOutput(np.asarray(mask_t, dtype=np.uint8), np.ones(np.shape(mask_t)))

    def for_region(self, box, shape):
        return self
