"""Synthetic toy shapes and the double-random-crop augmentation."""

from __future__ import annotations

import numpy as np

from .core import RngStream, as_image, as_mask, check_same_shape
from .imageops import PatchBox, resize_bilinear, resize_nearest

NOISE_SIGMA = 0.05
# foreground is lighter than its background by this much (mean over channels);
# absolute levels overlap across samples
CONTRAST_RANGE = (0.25, 0.4)
# shapes pushed mostly off-frame leave slivers no corruption can bring into a
# sensible IoU band; such draws are rejected
MIN_FOREGROUND = 0.02


def _ellipse(gen, size):
    rr, cc = np.mgrid[:size, :size] + 0.5
    cy, cx = gen.uniform(0.2, 0.8, 2) * size
    ay, ax = gen.uniform(0.08, 0.3, 2) * size
    theta = gen.uniform(0, np.pi)
    dy, dx = rr - cy, cc - cx
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    return (u / ax) ** 2 + (v / ay) ** 2 <= 1.0


def _polygon(gen, size):
    # convex polygon: sorted angles around a centre, inside = all half-planes
    rr, cc = np.mgrid[:size, :size] + 0.5
    n = int(gen.integers(3, 7))
    cy, cx = gen.uniform(0.25, 0.75, 2) * size
    radius = gen.uniform(0.1, 0.3) * size
    ang = np.sort(gen.uniform(0, 2 * np.pi, n))
    ys, xs = cy + radius * np.sin(ang), cx + radius * np.cos(ang)
    inside = np.ones((size, size), dtype=bool)
    for i in range(n):
        y0, x0, y1, x1 = ys[i], xs[i], ys[(i + 1) % n], xs[(i + 1) % n]
        inside &= (x1 - x0) * (rr - y0) - (y1 - y0) * (cc - x0) >= 0
    return inside


def _colour_pair(gen, channels):
    bg = gen.uniform(0.05, 0.55, channels)
    shift = gen.uniform(*CONTRAST_RANGE) + gen.uniform(-0.05, 0.05, channels)
    shift += CONTRAST_RANGE[0] - min(shift.mean(), CONTRAST_RANGE[0])
    return bg, np.clip(bg + shift, 0.0, 1.0)


def gen_shape(size: int, rng: RngStream, channels: int = 3):
    """One ``(image, gt)`` sample: 1-3 filled ellipses/convex polygons on a flat background.

    Layouts covering less than :data:`MIN_FOREGROUND` of the frame, or all of
    it, are redrawn.
    """
    gen = rng.generator()
    while True:
        gt = np.zeros((size, size), dtype=bool)
        for _ in range(int(gen.integers(1, 4))):
            gt |= _ellipse(gen, size) if gen.random() < 0.5 else _polygon(gen, size)
        if gt.mean() >= MIN_FOREGROUND and not gt.all():
            break
    bg, fg = _colour_pair(gen, channels)
    image = np.where(gt[:, :, None], fg, bg)
    image = image + gen.normal(0.0, NOISE_SIGMA, image.shape)
    return np.clip(image, 0.0, 1.0), gt.astype(np.uint8)


def gen_shapes(n: int, size: int, rng: RngStream, channels: int = 3):
    """``n`` samples; sample ``i`` depends only on ``rng.child(i)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if size < 16:
        raise ValueError("size must be >= 16")
    return [gen_shape(size, rng.child(i), channels) for i in range(n)]


def foreground_bbox(mask) -> PatchBox:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        raise ValueError("mask has empty foreground")
    return PatchBox(int(rows[0]), int(cols[0]), int(rows[-1] - rows[0] + 1),
                    int(cols[-1] - cols[0] + 1))


def _crop(image, mask, box, out_size):
    rs, cs = box.slices
    shape = (out_size, out_size)
    return resize_bilinear(image[rs, cs], shape), resize_nearest(mask[rs, cs], shape)


def _containing_crop(gen, bbox, h, w):
    top = int(gen.integers(0, bbox.top + 1))
    left = int(gen.integers(0, bbox.left + 1))
    bottom = int(gen.integers(bbox.bottom, h + 1))
    right = int(gen.integers(bbox.right, w + 1))
    return PatchBox(top, left, bottom - top, right - left)


def _partial_crop(gen, mask, bbox, out_size, attempts=100):
    h, w = mask.shape
    for _ in range(attempts):
        ch = int(gen.integers(max(1, h // 4), max(2, 3 * h // 4) + 1))
        cw = int(gen.integers(max(1, w // 4), max(2, 3 * w // 4) + 1))
        top = int(gen.integers(0, h - ch + 1))
        left = int(gen.integers(0, w - cw + 1))
        box = PatchBox(top, left, ch, cw)
        covers_bbox = (box.top <= bbox.top and box.left <= bbox.left
                       and box.bottom >= bbox.bottom and box.right >= bbox.right)
        if covers_bbox:
            continue
        m = resize_nearest(mask[box.slices], (out_size, out_size))
        if m.any():
            return box
    # fallback: a random sub-window of the foreground bbox
    ch = max(1, bbox.height // 2)
    cw = max(1, bbox.width // 2)
    top = bbox.top + int(gen.integers(0, bbox.height - ch + 1))
    left = bbox.left + int(gen.integers(0, bbox.width - cw + 1))
    return PatchBox(top, left, ch, cw)


def double_random_crop(image, gt, rng: RngStream, out_size=None, return_boxes=False):
    """Two training views: one crop holding the whole foreground, one holding part of it.

    Both views are resized to ``out_size`` (default: the image height).
    """
    image = as_image(image)
    gt = as_mask(gt, "gt")
    check_same_shape(("image", image), ("gt", gt))
    out_size = out_size or gt.shape[0]
    gen = rng.generator()
    bbox = foreground_bbox(gt)
    box_a = _containing_crop(gen, bbox, *gt.shape)
    box_b = _partial_crop(gen, gt, bbox, out_size)
    pairs = (_crop(image, gt, box_a, out_size), _crop(image, gt, box_b, out_size))
    if return_boxes:
        return pairs, (box_a, box_b)
    return pairs
