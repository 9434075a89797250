"""Independent slow reference implementations used as test oracles.

Everything here is plain Python loops over pixels or explicit enumeration;
none of it calls into the package under test.
"""

import itertools
import math


def bb_list(T, start):
    return [1.0] + [start * (T - t) / (T - 1) if T > 1 else 0.0 for t in range(1, T + 1)]


def brute_posterior(bar_beta, t, x_t, p0):
    """P(x_{t-1} = FINE | x_t) by summing over every full state path x_0..x_T.

    x_0 ~ [p0, 1 - p0]; each step keeps FINE with prob beta_s, COARSE is
    absorbing. Returns None when the conditioning event has probability 0.
    """
    T = len(bar_beta) - 1
    betas = [bar_beta[s] / bar_beta[s - 1] for s in range(1, T + 1)]
    num = den = 0.0
    for path in itertools.product((0, 1), repeat=T + 1):  # 0 = FINE, 1 = COARSE
        w = p0 if path[0] == 0 else 1.0 - p0
        for s in range(1, T + 1):
            prev, cur = path[s - 1], path[s]
            if prev == 1:
                w *= 1.0 if cur == 1 else 0.0
            else:
                w *= betas[s - 1] if cur == 0 else 1.0 - betas[s - 1]
            if w == 0.0:
                break
        if path[t] != x_t:
            continue
        den += w
        if path[t - 1] == 0:
            num += w
    if den == 0.0:
        return None
    return num / den


def _get(mask, r, c, outside):
    h, w = len(mask), len(mask[0])
    if 0 <= r < h and 0 <= c < w:
        return mask[r][c]
    return outside


def dilate(mask, r):
    h, w = len(mask), len(mask[0])
    return [[int(any(_get(mask, i + a, j + b, 0)
                     for a in range(-r, r + 1) for b in range(-r, r + 1)))
             for j in range(w)] for i in range(h)]


def erode(mask, r):
    h, w = len(mask), len(mask[0])
    return [[int(all(_get(mask, i + a, j + b, 1)
                     for a in range(-r, r + 1) for b in range(-r, r + 1)))
             for j in range(w)] for i in range(h)]


def to_list(arr):
    return [[int(v) for v in row] for row in arr]


def pixel_set(mask):
    return {(i, j) for i, row in enumerate(mask) for j, v in enumerate(row) if v}


def iou(a, b):
    sa, sb = pixel_set(a), pixel_set(b)
    if not sa | sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def boundary_accuracy(pred, gt, r):
    er = erode(gt, 1)
    contour = [[g ^ e for g, e in zip(rg, re)] for rg, re in zip(gt, er)]
    band = pixel_set(dilate(contour, r))
    if not band:
        return 1.0
    return sum(pred[i][j] == gt[i][j] for i, j in band) / len(band)


def mba(pred, gt):
    h, w = len(gt), len(gt[0])
    hi = max(3, math.floor(0.02 * math.hypot(h, w) + 0.5))
    radii = sorted({math.floor(3 + k * (hi - 3) / 4 + 0.5) for k in range(5)})
    return sum(boundary_accuracy(pred, gt, r) for r in radii) / len(radii)


def boundary_iou(pred, gt, d):
    def band(m):
        return pixel_set(m) - pixel_set(erode(m, d))
    bp, bg = band(pred), band(gt)
    if not bp | bg:
        return 1.0
    return len(bp & bg) / len(bp | bg)


SOBEL_X = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
SOBEL_Y = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]


def sobel_magnitude(field):
    h, w = len(field), len(field[0])

    def px(i, j):
        return field[min(max(i, 0), h - 1)][min(max(j, 0), w - 1)]

    out = []
    for i in range(h):
        row = []
        for j in range(w):
            gx = sum(SOBEL_X[a][b] * px(i + a - 1, j + b - 1) for a in range(3) for b in range(3))
            gy = sum(SOBEL_Y[a][b] * px(i + a - 1, j + b - 1) for a in range(3) for b in range(3))
            row.append(math.sqrt(gx * gx + gy * gy))
        out.append(row)
    return out


def texture_loss(scores, gt):
    ms, mg = sobel_magnitude(scores), sobel_magnitude(gt)
    h, w = len(scores), len(scores[0])
    return sum(abs(ms[i][j] - mg[i][j]) for i in range(h) for j in range(w)) / (h * w)


def box_iou(a, b):
    """Boxes as (top, left, height, width)."""
    ih = min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0])
    iw = min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1])
    inter = max(ih, 0) * max(iw, 0)
    return inter / (a[2] * a[3] + b[2] * b[3] - inter)
