"""Corrupt a mask and watch the metrics react.

Dilation, erosion and boundary blobs produce the kinds of errors a coarse
segmenter makes. IoU scores whole regions; mBA and Boundary IoU only look
near the contour, so they fall faster when the edge is wrong.

    python demos/degrade_and_measure.py
"""

import numpy as np

from maskrefine import DegradeConfig, RngStream, boundary_iou, dilate, erode, iou, mba
from maskrefine import perturb_boundary, synthesize_coarse
from maskrefine.data import gen_shapes

_, gt = gen_shapes(1, 128, RngStream(11))[0]

print(f"{'corruption':<22} {'IoU':>7} {'mBA':>7} {'BIoU':>7}")
for name, m in [
    ("none", gt),
    ("dilate r=2", dilate(gt, 2)),
    ("dilate r=5", dilate(gt, 5)),
    ("erode r=3", erode(gt, 3)),
    ("6 boundary blobs", perturb_boundary(gt, 6, (3, 8), RngStream(12))),
]:
    print(f"{name:<22} {iou(m, gt):7.4f} {mba(m, gt):7.4f} {boundary_iou(m, gt):7.4f}")

print("\nrandom corruptions held to an IoU band:")
for lo, hi in [(0.65, 0.85), (0.9, 0.95)]:
    cfg = DegradeConfig(iou_min=lo, iou_max=hi)
    got = [iou(synthesize_coarse(gt, cfg, RngStream(13, (k,))), gt) for k in range(20)]
    print(f"  band [{lo}, {hi}]: min {min(got):.3f}  mean {np.mean(got):.3f}  max {max(got):.3f}")
