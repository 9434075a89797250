"""Training loop for :class:`~maskrefine.tiny.TinyDenoiser` and its gradient check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_SCHEDULE, NoiseSchedule, RngStream, as_image, as_mask, check_same_shape
from .forward import compose_mask, sample_marginal
from .losses import LossConfig, total_loss_grad
from .tiny import TinyDenoiser, build_input


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 5000
    lr: float = 0.05
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.lr < 0:
            raise ValueError("lr must be >= 0")


def _check_sample(sample):
    image, gt, coarse = sample
    image = as_image(image)
    gt = as_mask(gt, "gt")
    coarse = as_mask(coarse, "coarse")
    check_same_shape(("image", image), ("gt", gt), ("coarse", coarse))
    return image, gt, coarse


def draw_timestep(schedule: NoiseSchedule, rng: RngStream) -> int:
    """Uniform draw from ``{1, ..., T}``."""
    return int(rng.generator().integers(1, schedule.T + 1))


def noisy_input(gt, coarse, schedule: NoiseSchedule, rng: RngStream):
    """Draw ``t`` and build ``m_t`` from the closed-form marginal."""
    t = draw_timestep(schedule, rng.child(0))
    h, w = gt.shape
    states = sample_marginal(schedule, t, w, h, rng.child(1))
    return t, compose_mask(states, gt, coarse)


def loss_and_grads(model: TinyDenoiser, image, mask_t, t, gt, loss_config: LossConfig):
    x = build_input(image, mask_t, t, model.num_steps)
    scores, caches = model.forward(x)
    loss, d_scores = total_loss_grad(scores, gt, loss_config)
    return loss, model.backward(caches, d_scores)


def train_step(model: TinyDenoiser, sample, schedule: NoiseSchedule = DEFAULT_SCHEDULE,
               config: TrainConfig = TrainConfig(), rng: RngStream = RngStream(0)) -> float:
    """One SGD update on ``sample = (image, gt, coarse)``; returns the pre-update loss."""
    image, gt, coarse = _check_sample(sample)
    t, mask_t = noisy_input(gt, coarse, schedule, rng)
    loss, grads = loss_and_grads(model, image, mask_t, t, gt, config.loss)
    if config.lr != 0:
        model.apply_update(grads, config.lr)
    return loss


def train(dataset, schedule: NoiseSchedule = DEFAULT_SCHEDULE,
          config: TrainConfig = TrainConfig(), rng: RngStream = RngStream(0),
          model: TinyDenoiser | None = None, log_every: int = 0, log=print) -> TinyDenoiser:
    """SGD over reshuffled passes of ``dataset`` for ``config.iterations`` steps.

    ``dataset`` is a sequence of ``(image, gt, coarse)`` triples. The model
    is initialised from ``rng.child(0)`` unless given; epoch ``e`` is
    shuffled with ``rng.child(1, e)`` and step ``k`` draws from
    ``rng.child(2, k)``.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("dataset is empty")
    if model is None:
        channels = as_image(dataset[0][0]).shape[2]
        model = TinyDenoiser(image_channels=channels, num_steps=schedule.T,
                             input_size=max(np.shape(dataset[0][1])), rng=rng.child(0))
    order = []
    running = []
    for k in range(config.iterations):
        if not order:
            epoch = k // len(dataset)
            order = list(rng.child(1, epoch).generator().permutation(len(dataset)))
        idx = order.pop()
        loss = train_step(model, dataset[idx], schedule, config, rng.child(2, k))
        running.append(loss)
        if log_every and (k + 1) % log_every == 0:
            log(f"step {k + 1}: mean loss {np.mean(running):.4f}")
            running = []
    return model


def gradient_check(model: TinyDenoiser, sample, config: LossConfig = LossConfig(),
                   t: int | None = None, step: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients.

    The input mask is the sample's coarse mask at step ``t`` (default ``T``).
    Every parameter is perturbed, so keep the grid small.
    """
    image, gt, coarse = _check_sample(sample)
    t = model.num_steps if t is None else t
    x = build_input(image, coarse, t, model.num_steps)
    _, grads = loss_and_grads(model, image, coarse, t, gt, config)

    def loss_at():
        return total_loss_grad(model.forward(x)[0], gt, config)[0]

    worst = 0.0
    for (w, b), (dw, db) in zip(model.params, grads):
        for param, grad in ((w, dw), (b, db)):
            flat, gflat = param.reshape(-1), grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + step
                up = loss_at()
                flat[i] = orig - step
                down = loss_at()
                flat[i] = orig
                fd = (up - down) / (2 * step)
                denom = max(abs(gflat[i]), abs(fd), 1e-8)
                worst = max(worst, abs(gflat[i] - fd) / denom)
    return worst
