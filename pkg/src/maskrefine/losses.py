"""Training objective: binary cross-entropy plus weighted texture (edge) loss.

Each loss has a ``*_grad`` twin returning ``(value, d value / d scores)`` for
the hand-written backward pass of :class:`maskrefine.tiny.TinyDenoiser`.
"""

from dataclasses import dataclass

import numpy as np

from .core import as_mask, check_same_shape

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T.copy()


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 5.0
    clip_epsilon: float = 1e-7

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0.0 < self.clip_epsilon < 0.5:
            raise ValueError("clip_epsilon must lie in (0, 0.5)")


def _prepare(scores, gt):
    scores = np.asarray(scores, dtype=np.float64)
    gt = as_mask(gt, "gt").astype(np.float64)
    check_same_shape(("scores", scores), ("gt", gt))
    return scores, gt


def sobel(field):
    """Sobel responses ``(gx, gy)`` with replicate borders.

    Evaluated in separable form, differencing first, so flat regions give
    exact zeros.
    """
    field = np.asarray(field, dtype=np.float64)
    p = np.pad(field, 1, mode="edge")
    dx = p[:, 2:] - p[:, :-2]
    dy = p[2:, :] - p[:-2, :]
    gx = dx[:-2] + 2.0 * dx[1:-1] + dx[2:]
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    return gx, gy


def gradient_magnitude(field):
    gx, gy = sobel(field)
    return np.sqrt(gx * gx + gy * gy)


def _sobel_backward(d_gx, d_gy):
    h, w = d_gx.shape
    dp = np.zeros((h + 2, w + 2))
    for a in range(3):
        for b in range(3):
            dp[a:a + h, b:b + w] += SOBEL_X[a, b] * d_gx + SOBEL_Y[a, b] * d_gy
    # fold the replicated border back onto the edge pixels it copied
    d = dp[1:-1, 1:-1].copy()
    d[0, :] += dp[0, 1:-1]
    d[-1, :] += dp[-1, 1:-1]
    d[:, 0] += dp[1:-1, 0]
    d[:, -1] += dp[1:-1, -1]
    d[0, 0] += dp[0, 0]
    d[0, -1] += dp[0, -1]
    d[-1, 0] += dp[-1, 0]
    d[-1, -1] += dp[-1, -1]
    return d


def bce_loss_grad(scores, gt, clip_epsilon=1e-7):
    scores, y = _prepare(scores, gt)
    s = np.clip(scores, clip_epsilon, 1.0 - clip_epsilon)
    n = s.size
    loss = -np.mean(y * np.log(s) + (1.0 - y) * np.log1p(-s))
    inside = (scores > clip_epsilon) & (scores < 1.0 - clip_epsilon)
    grad = np.where(inside, (-y / s + (1.0 - y) / (1.0 - s)) / n, 0.0)
    return float(loss), grad


def bce_loss(scores, gt, clip_epsilon=1e-7) -> float:
    """Mean binary cross-entropy with scores clamped to ``[eps, 1 - eps]``."""
    return bce_loss_grad(scores, gt, clip_epsilon)[0]


def texture_loss_grad(scores, gt):
    scores, y = _prepare(scores, gt)
    gx, gy = sobel(scores)
    mag = np.sqrt(gx * gx + gy * gy)
    diff = mag - gradient_magnitude(y)
    loss = np.mean(np.abs(diff))
    d_mag = np.sign(diff) / diff.size
    # zero-magnitude pixels take the zero subgradient
    safe = np.where(mag > 0, mag, 1.0)
    d_gx = np.where(mag > 0, d_mag * gx / safe, 0.0)
    d_gy = np.where(mag > 0, d_mag * gy / safe, 0.0)
    return float(loss), _sobel_backward(d_gx, d_gy)


def texture_loss(scores, gt) -> float:
    """Mean L1 distance between Sobel gradient magnitudes of ``scores`` and ``gt``."""
    return texture_loss_grad(scores, gt)[0]


def total_loss_grad(scores, gt, config: LossConfig = LossConfig()):
    l_bce, g_bce = bce_loss_grad(scores, gt, config.clip_epsilon)
    if config.alpha == 0:
        return l_bce, g_bce
    l_tex, g_tex = texture_loss_grad(scores, gt)
    return l_bce + config.alpha * l_tex, g_bce + config.alpha * g_tex


def total_loss(scores, gt, config: LossConfig = LossConfig()) -> float:
    return total_loss_grad(scores, gt, config)[0]
