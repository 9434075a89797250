import numpy as np
import pytest

from maskrefine.core import RngStream
from maskrefine.denoiser import DenoiserOutput, OracleDenoiser
from maskrefine.hires import (
    HiresOptions,
    crop_resize,
    instance_box,
    nms,
    refine_hires,
    refine_instance,
    select_patch_centers,
)
from maskrefine.imageops import PatchBox, resize_bilinear, resize_nearest
from conftest import random_blob
from oracles import box_iou


def test_instance_box_examples():
    m = np.zeros((100, 100), np.uint8)
    m[10:51, 10:51] = 1
    box = instance_box(m, 20)
    assert (box.top, box.left, box.bottom - 1, box.right - 1) == (0, 0, 70, 70)
    tight = instance_box(m, 0)
    assert (tight.top, tight.left, tight.height, tight.width) == (10, 10, 41, 41)
    full = instance_box(np.ones((30, 40), np.uint8), 20)
    assert (full.top, full.left, full.height, full.width) == (0, 0, 30, 40)
    with pytest.raises(ValueError):
        instance_box(np.zeros((5, 5), np.uint8))


def test_crop_resize_cases(gen):
    image = gen.random((12, 12, 3))
    mask = (gen.random((12, 12)) < 0.5).astype(np.uint8)
    full = PatchBox(0, 0, 12, 12)
    img2, m2 = crop_resize(image, mask, full, 12)
    assert np.array_equal(img2, image) and np.array_equal(m2, mask)
    _, up = crop_resize(np.zeros((2, 2)), np.array([[1, 0], [0, 0]]), PatchBox(0, 0, 2, 2), 4)
    want = np.zeros((4, 4), np.uint8)
    want[:2, :2] = 1
    assert np.array_equal(up, want)
    const, m3 = crop_resize(np.full((12, 12, 3), 0.37), mask, PatchBox(1, 2, 7, 9), 20)
    assert (const == 0.37).all()
    assert set(np.unique(m3)) <= {0, 1}
    with pytest.raises(ValueError):
        crop_resize(image, mask, PatchBox(5, 5, 10, 10), 8)


def test_nearest_up_down_round_trip(gen):
    m = (gen.random((13, 7)) < 0.5).astype(np.uint8)
    for shape in [(13, 7), (20, 9), (64, 64), (27, 15)]:
        assert np.array_equal(resize_nearest(resize_nearest(m, shape), m.shape), m)


def test_bilinear_known_values():
    a = np.array([[0.0, 1.0]])
    np.testing.assert_allclose(resize_bilinear(a, (1, 4)), [[0, 0.25, 0.75, 1]])


def test_refine_instance_oracle(gen):
    gt = np.zeros((80, 80), np.uint8)
    gt[30:50, 25:55] = 1
    coarse = np.roll(gt, 3, axis=0)
    coarse[70:, 70:] = 1  # stray blob widens the box
    box = instance_box(coarse, 5)
    gt_far = gt.copy()
    gt_far[0:3, 0:3] = 1  # GT detail outside the box must not leak in
    out = refine_instance(np.zeros((80, 80)), coarse, OracleDenoiser(gt_far), rng=RngStream(1),
                          margin=5, size=96)
    inside = np.zeros_like(gt, bool)
    inside[box.slices] = True
    assert np.array_equal(out[inside], gt_far[inside])
    assert np.array_equal(out[~inside], coarse[~inside])


def test_refine_instance_identity_and_empty(gen):
    gt = random_blob(gen, 48)
    out = refine_instance(np.zeros((48, 48)), gt, OracleDenoiser(gt, 0.4), rng=RngStream(0))
    assert np.array_equal(out, gt)
    with pytest.raises(ValueError):
        refine_instance(np.zeros((8, 8)), np.zeros((8, 8)), OracleDenoiser(np.ones((8, 8))))


def test_select_patch_centers():
    assert select_patch_centers(np.ones((20, 20)), 0.5, 8) == []
    probs = np.ones((21, 21))
    probs[10, 10] = 0.0
    boxes = select_patch_centers(probs, 0.5, 7)
    assert len(boxes) == 1
    assert (boxes[0].top, boxes[0].left, boxes[0].height) == (7, 7, 7)
    assert boxes[0].score == pytest.approx(1 / 49)
    with pytest.raises(ValueError):
        select_patch_centers(probs, 1.5, 7)


def test_two_clusters_survive_nms():
    probs = np.ones((60, 60))
    probs[5:8, 5:8] = 0.1
    probs[50:53, 48:52] = 0.2
    boxes = select_patch_centers(probs, 0.5, 16)
    assert len(boxes) == 21
    scores = [b.score for b in boxes]
    assert scores == sorted(scores, reverse=True)
    kept = nms(boxes, 0.3)
    assert len(kept) >= 2
    centres = {(b.top + 8 < 30) for b in kept}
    assert centres == {True, False}


def test_nms_examples():
    a = PatchBox(0, 0, 10, 10, 1.0)
    assert nms([a, PatchBox(0, 0, 10, 10, 0.5)]) == [a]
    disjoint = [PatchBox(0, 0, 4, 4, 0.1), PatchBox(10, 10, 4, 4, 0.9), PatchBox(20, 0, 4, 4, 0.5)]
    assert len(nms(disjoint)) == 3
    assert nms([]) == []


def test_nms_hand_trace():
    b1, b2, b3 = (0, 0, 6, 6), (0, 0, 3, 6), (0, 3, 4, 9)
    assert box_iou(b1, b2) == pytest.approx(0.5)
    assert box_iou(b1, b3) == pytest.approx(0.2)
    assert box_iou(b2, b3) == pytest.approx(0.2)
    boxes = [PatchBox(*b2, score=2), PatchBox(*b3, score=1), PatchBox(*b1, score=3)]
    kept = nms(boxes, 0.3)
    assert [(k.top, k.left, k.height, k.width) for k in kept] == [b1, b3]


def test_nms_properties(gen):
    boxes = [PatchBox(int(gen.integers(0, 40)), int(gen.integers(0, 40)), int(gen.integers(4, 20)),
                      int(gen.integers(4, 20)), float(gen.random())) for _ in range(60)]
    kept = nms(boxes, 0.3)
    scores = [k.score for k in kept]
    assert scores == sorted(scores, reverse=True)
    for i, a in enumerate(kept):
        for b in kept[i + 1:]:
            assert a.iou(b) <= 0.3
    # every dropped box overlaps some higher-scored kept box
    for b in boxes:
        if b not in kept:
            assert any(k.iou(b) > 0.3 and k.score >= b.score for k in kept)


class ConfidenceMapOracle:
    """Ground truth with a per-pixel confidence map, cropped per region."""

    def __init__(self, gt, conf, input_size):
        self.gt = gt
        self.conf = conf
        self.input_size = input_size

    def predict(self, image, mask_t, t):
        assert mask_t.shape == self.gt.shape
        return DenoiserOutput(self.gt, self.conf)

    def for_region(self, box, shape):
        rs, cs = box.slices
        return ConfidenceMapOracle(resize_nearest(self.gt[rs, cs], shape),
                                   resize_nearest(self.conf[rs, cs], shape), self.input_size)


def _hires_fixture(gen):
    gt = np.zeros((96, 96), np.uint8)
    gt[20:76, 24:70] = 1
    coarse = np.roll(gt, (4, -3), axis=(0, 1))
    image = gen.random((96, 96, 3))
    return image, gt, coarse


def test_hires_no_patches_is_upsampled_global(gen, schedule):
    image, gt, coarse = _hires_fixture(gen)
    den = OracleDenoiser(gt, 0.8, input_size=32)
    out, boxes = refine_hires(image, coarse, den, schedule, RngStream(3),
                              HiresOptions(tau=0.0), return_patches=True)
    assert boxes == []
    from maskrefine.reverse import refine
    glob = refine(resize_bilinear(image, (32, 32)), resize_nearest(coarse, (32, 32)),
                  den.for_region(PatchBox(0, 0, 96, 96), (32, 32)), schedule,
                  RngStream(3).child(0), last_step=2)
    assert np.array_equal(out, resize_nearest(glob.final_mask, (96, 96)))


def test_hires_oracle_exact_inside_patches(gen, schedule):
    image, gt, coarse = _hires_fixture(gen)
    den = OracleDenoiser(gt, 1.0, input_size=32)
    out, boxes = refine_hires(image, coarse, den, schedule, RngStream(5),
                              HiresOptions(tau=0.5), return_patches=True)
    assert boxes
    covered = np.zeros(gt.shape, bool)
    for b in boxes:
        covered[b.slices] = True
    assert np.array_equal(out[covered], gt[covered])


def test_hires_paste_locality(gen, schedule):
    image, gt, coarse = _hires_fixture(gen)
    conf = np.ones(gt.shape)
    conf[60:70, 60:70] = 0.0
    den = ConfidenceMapOracle(gt, conf, 32)
    base = refine_hires(image, coarse, den, schedule, RngStream(7),
                        HiresOptions(global_size=32, patch_size=24, tau=0.0))
    out, boxes = refine_hires(image, coarse, den, schedule, RngStream(7),
                              HiresOptions(global_size=32, patch_size=24, tau=0.1),
                              return_patches=True)
    assert len(boxes) >= 1
    covered = np.zeros(gt.shape, bool)
    for b in boxes:
        covered[b.slices] = True
        assert b.top <= 65 <= b.bottom and b.left <= 65 <= b.right
    assert np.array_equal(out[~covered], base[~covered])
    assert not np.array_equal(out[covered], base[covered])


def test_hires_small_image_falls_back(gen, schedule):
    gt = random_blob(gen, 24)
    out = refine_hires(np.zeros((24, 24)), 1 - gt, OracleDenoiser(gt, input_size=32), schedule)
    assert np.array_equal(out, gt)


def test_hires_deterministic(gen, schedule):
    image, gt, coarse = _hires_fixture(gen)
    den = lambda: OracleDenoiser(gt, 0.7, error_rate=0.05, seed=2, input_size=32)
    a = refine_hires(image, coarse, den(), schedule, RngStream(9))
    b = refine_hires(image, coarse, den(), schedule, RngStream(9))
    assert np.array_equal(a, b)
