"""Instance-crop refinement and global-plus-local refinement of large images.

The global stage runs reverse steps ``T..2`` on a downsized copy of the
whole frame. Pixels whose probability of having reached the fine state is
low become centres of full-resolution patches, which are thinned by NMS and
each given the final reverse step ``t = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    COARSE,
    DEFAULT_SCHEDULE,
    NoiseSchedule,
    RngStream,
    as_image,
    as_mask,
    as_probability_map,
    check_same_shape,
)
from .denoiser import denoise
from .imageops import PatchBox, resize_bilinear, resize_nearest
from .reverse import refine, reverse_step

__all__ = [
    "HiresOptions",
    "PatchBox",
    "crop_resize",
    "instance_box",
    "nms",
    "refine_hires",
    "refine_instance",
    "select_patch_centers",
]


def instance_box(coarse, margin: int = 20) -> PatchBox:
    """Tight foreground bbox grown by ``margin`` on each side, clamped to the frame."""
    coarse = as_mask(coarse, "coarse")
    rows = np.flatnonzero(coarse.any(axis=1))
    cols = np.flatnonzero(coarse.any(axis=0))
    if rows.size == 0:
        raise ValueError("coarse mask has empty foreground")
    h, w = coarse.shape
    top = max(int(rows[0]) - margin, 0)
    left = max(int(cols[0]) - margin, 0)
    bottom = min(int(rows[-1]) + 1 + margin, h)
    right = min(int(cols[-1]) + 1 + margin, w)
    return PatchBox(top, left, bottom - top, right - left)


def crop_resize(image, mask, box: PatchBox, size: int):
    """Crop ``box`` and resample to ``size x size`` (bilinear image, nearest mask)."""
    image = as_image(image)
    mask = as_mask(mask)
    check_same_shape(("image", image), ("mask", mask))
    if not box.within(*mask.shape):
        raise ValueError(f"box {box} lies outside the {mask.shape} frame")
    rs, cs = box.slices
    return (resize_bilinear(image[rs, cs], (size, size)),
            resize_nearest(mask[rs, cs], (size, size)))


def refine_instance(image, coarse, denoiser, schedule: NoiseSchedule = DEFAULT_SCHEDULE,
                    rng: RngStream = RngStream(0), margin: int = 20, size=None):
    """Refine one instance inside its expanded bbox; pixels outside are untouched."""
    image = as_image(image)
    coarse = as_mask(coarse, "coarse")
    box = instance_box(coarse, margin)
    size = size or denoiser.input_size
    crop_img, crop_mask = crop_resize(image, coarse, box, size)
    local = denoiser.for_region(box, (size, size))
    result = refine(crop_img, crop_mask, local, schedule, rng)
    out = coarse.copy()
    out[box.slices] = resize_nearest(result.final_mask, (box.height, box.width))
    return out


def _box_at(row, col, patch, h, w):
    ph, pw = min(patch, h), min(patch, w)
    top = min(max(row - patch // 2, 0), h - ph)
    left = min(max(col - patch // 2, 0), w - pw)
    return top, left, ph, pw


def select_patch_centers(fine_transition_probs, tau: float = 0.5, patch: int = 64):
    """Candidate boxes centred on pixels with probability below ``tau``.

    Each box is scored ``1 - mean probability inside``; the list is sorted by
    score descending, ties broken by row-major centre order.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    if patch < 1:
        raise ValueError("patch must be >= 1")
    probs = as_probability_map(fine_transition_probs, "fine_transition_probs")
    h, w = probs.shape
    centres = np.argwhere(probs < tau)
    if centres.size == 0:
        return []
    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = probs.cumsum(0).cumsum(1)
    ph, pw = min(patch, h), min(patch, w)
    tops = np.clip(centres[:, 0] - patch // 2, 0, h - ph)
    lefts = np.clip(centres[:, 1] - patch // 2, 0, w - pw)
    sums = (integral[tops + ph, lefts + pw] - integral[tops, lefts + pw]
            - integral[tops + ph, lefts] + integral[tops, lefts])
    scores = 1.0 - sums / (ph * pw)
    order = np.argsort(-scores, kind="stable")
    return [PatchBox(int(tops[i]), int(lefts[i]), ph, pw, float(scores[i])) for i in order]


def nms(boxes, iou_threshold: float = 0.3):
    """Greedy suppression: keep boxes by descending score, dropping any whose
    IoU with an already-kept box exceeds ``iou_threshold``."""
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError("iou_threshold must lie in [0, 1]")
    if not boxes:
        return []
    boxes = sorted(boxes, key=lambda b: -b.score)
    coords = np.array([[b.top, b.left, b.bottom, b.right] for b in boxes], dtype=np.float64)
    areas = (coords[:, 2] - coords[:, 0]) * (coords[:, 3] - coords[:, 1])
    remaining = np.arange(len(boxes))
    keep = []
    while remaining.size:
        i = remaining[0]
        keep.append(boxes[i])
        rest = remaining[1:]
        ih = np.minimum(coords[i, 2], coords[rest, 2]) - np.maximum(coords[i, 0], coords[rest, 0])
        iw = np.minimum(coords[i, 3], coords[rest, 3]) - np.maximum(coords[i, 1], coords[rest, 1])
        inter = np.maximum(ih, 0) * np.maximum(iw, 0)
        overlap = inter / (areas[i] + areas[rest] - inter)
        remaining = rest[overlap <= iou_threshold]
    return keep


@dataclass(frozen=True)
class HiresOptions:
    """``None`` sizes default to the denoiser's input size."""

    global_size: int | None = None
    tau: float = 0.5
    patch_size: int | None = None
    nms_threshold: float = 0.3


def refine_hires(image, coarse, denoiser, schedule: NoiseSchedule = DEFAULT_SCHEDULE,
                 rng: RngStream = RngStream(0), options: HiresOptions = HiresOptions(),
                 return_patches: bool = False):
    """Global steps ``T..2`` on a downsized frame, then step 1 on full-size patches.

    Randomness: the global stage uses ``rng.child(0)``, patch ``k`` uses
    ``rng.child(1, k)``. Patch outputs overlapping each other are averaged
    and thresholded at 0.5.
    """
    image = as_image(image)
    coarse = as_mask(coarse, "coarse")
    check_same_shape(("image", image), ("coarse", coarse))
    h, w = coarse.shape
    gs = options.global_size or denoiser.input_size
    patch = options.patch_size or denoiser.input_size
    full = PatchBox(0, 0, h, w)

    if h <= gs and w <= gs or schedule.T < 2:
        res = refine(image, coarse, denoiser.for_region(full, (h, w)), schedule, rng.child(0))
        return (res.final_mask, []) if return_patches else res.final_mask

    small_img, small_coarse = crop_resize(image, coarse, full, gs)
    glob = refine(small_img, small_coarse, denoiser.for_region(full, (gs, gs)), schedule,
                  rng.child(0), last_step=2)
    mask_1 = resize_nearest(glob.final_mask, (h, w))
    states_1 = resize_nearest(glob.states, (h, w))
    probs = np.clip(resize_bilinear(glob.fine_transition_probs, (h, w)), 0.0, 1.0)

    boxes = nms(select_patch_centers(probs, options.tau, patch), options.nms_threshold)
    if not boxes:
        return (mask_1, []) if return_patches else mask_1

    votes = np.zeros((h, w))
    counts = np.zeros((h, w))
    for k, box in enumerate(boxes):
        rs, cs = box.slices
        local = denoiser.for_region(box, (box.height, box.width))
        out = denoise(local, image[rs, cs], mask_1[rs, cs], 1)
        _, patch_mask, _ = reverse_step(states_1[rs, cs], out.predicted_fine, out.confidence,
                                        coarse[rs, cs], schedule, 1, rng.child(1, k))
        votes[rs, cs] += patch_mask
        counts[rs, cs] += 1
    result = mask_1.copy()
    covered = counts > 0
    result[covered] = (votes[covered] / counts[covered] >= 0.5).astype(np.uint8)
    return (result, boxes) if return_patches else result
