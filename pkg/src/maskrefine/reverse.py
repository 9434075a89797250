"""Reverse refinement: posterior, reversed transition matrices and the sampler loop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    COARSE,
    DEFAULT_SCHEDULE,
    FINE,
    NoiseSchedule,
    RngStream,
    as_image,
    as_mask,
    as_probability_map,
    as_states,
    check_same_shape,
    gumbel_choose_first,
)
from .denoiser import denoise
from .forward import compose_mask, forward_matrix, marginal_matrix


def _check_p0(p0):
    p = np.asarray(p0, dtype=np.float64)
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("confidence p0 must lie in [0, 1]")
    return p


def coarse_to_fine_probability(p0, schedule: NoiseSchedule, t: int):
    """Probability that a COARSE pixel at step ``t`` is FINE at ``t-1``.

    Vectorised over ``p0``; this is the off-diagonal entry of
    :func:`reverse_matrix`.
    """
    t = schedule.check_step(t)
    p = _check_p0(p0)
    prev, cur = schedule.bar_beta[t - 1], schedule.bar_beta[t]
    # 1 - p*cur >= 1 - cur > 0 because bar_beta[t] < 1 for t >= 1
    return p * (prev - cur) / (1.0 - p * cur)


def reverse_matrix(p0: float, schedule: NoiseSchedule, t: int) -> np.ndarray:
    """Reversed transition matrix for one pixel of confidence ``p0``.

    Rows are the state at ``t``, columns the state at ``t-1``; the FINE row
    is always ``[1, 0]``.
    """
    t = schedule.check_step(t)
    p = float(_check_p0(p0))
    prev, cur = schedule.bar_beta[t - 1], schedule.bar_beta[t]
    denom = 1.0 - p * cur
    return np.array([
        [1.0, 0.0],
        [p * (prev - cur) / denom, (1.0 - p * prev) / denom],
    ])


def posterior(x_t_state: int, p0: float, schedule: NoiseSchedule, t: int) -> np.ndarray:
    """``q(x_{t-1} | x_t, x_0)`` with the soft start ``x_0 = [p0, 1 - p0]``.

    Evaluated as ``(x_t Q_t^T * x_0 Qbar_{t-1}) / (x_0 Qbar_t x_t^T)``. When the
    conditioning event has zero probability (a FINE pixel that cannot be
    fine) the FINE row ``[1, 0]`` is returned.
    """
    t = schedule.check_step(t)
    if x_t_state not in (FINE, COARSE):
        raise ValueError("x_t_state must be FINE or COARSE")
    p = float(_check_p0(p0))
    x0 = np.array([p, 1.0 - p])
    xt = np.eye(2)[x_t_state]
    q_t = forward_matrix(schedule.retention(t))
    num = (xt @ q_t.T) * (x0 @ marginal_matrix(schedule, t - 1))
    den = x0 @ marginal_matrix(schedule, t) @ xt
    if den == 0.0:
        return np.array([1.0, 0.0])
    # num sums to den analytically; normalising by its own sum keeps rows exact
    return num / num.sum()


def reverse_step(states_t, predicted_fine, confidence, coarse_mask,
                 schedule: NoiseSchedule, t: int, rng: RngStream):
    """Sample ``x_{t-1}`` and compose ``m_{t-1}``.

    Returns ``(states, mask, fine_transition_probs)`` where the last map holds
    each pixel's probability of being FINE after this step (1 for pixels
    already FINE).
    """
    t = schedule.check_step(t)
    states_t = as_states(states_t, "states_t")
    predicted_fine = as_mask(predicted_fine, "predicted_fine")
    confidence = as_probability_map(confidence, "confidence")
    coarse_mask = as_mask(coarse_mask, "coarse_mask")
    check_same_shape(("states_t", states_t), ("predicted_fine", predicted_fine),
                     ("confidence", confidence), ("coarse_mask", coarse_mask))
    to_fine = coarse_to_fine_probability(confidence, schedule, t)
    fine_prob = np.where(states_t == FINE, 1.0, to_fine)
    becomes_fine = gumbel_choose_first(fine_prob, rng)
    states = np.where(becomes_fine, FINE, COARSE).astype(np.uint8)
    mask = compose_mask(states, predicted_fine, coarse_mask)
    return states, mask, fine_prob


@dataclass
class RefinementResult:
    final_mask: np.ndarray
    final_confidence: np.ndarray
    fine_transition_probs: np.ndarray
    states: np.ndarray
    steps_executed: int
    intermediate_masks: Optional[list] = field(default=None)


def refine(image, coarse, denoiser, schedule: NoiseSchedule = DEFAULT_SCHEDULE,
           rng: RngStream = RngStream(0), keep_intermediates: bool = False,
           last_step: int = 1) -> RefinementResult:
    """Run the reverse process from ``t = T`` down to ``last_step``.

    Coarse-state pixels are always recomposed from the original ``coarse``
    mask. Step ``t`` samples from ``rng.child(t)``. With ``last_step > 1`` the
    run stops early and ``final_mask`` is ``m_{last_step - 1}``.

    If ``keep_intermediates`` is set, ``intermediate_masks`` holds
    ``[m_T, ..., m_{last_step - 1}]``.
    """
    image = as_image(image)
    coarse = as_mask(coarse, "coarse")
    check_same_shape(("image", image), ("coarse", coarse))
    if not 1 <= last_step <= schedule.T:
        raise ValueError(f"last_step must lie in [1, {schedule.T}]")

    states = np.full(coarse.shape, COARSE, dtype=np.uint8)
    mask = coarse.copy()
    history = [mask] if keep_intermediates else None
    confidence = fine_prob = None
    for t in range(schedule.T, last_step - 1, -1):
        out = denoise(denoiser, image, mask, t)
        states, mask, fine_prob = reverse_step(
            states, out.predicted_fine, out.confidence, coarse, schedule, t, rng.child(t))
        confidence = out.confidence
        if history is not None:
            history.append(mask)
    return RefinementResult(
        final_mask=mask,
        final_confidence=confidence,
        fine_transition_probs=fine_prob,
        states=states,
        steps_executed=schedule.T - last_step + 1,
        intermediate_masks=history,
    )


def refine_no_diffusion(image, coarse, denoiser, steps: int,
                        schedule: NoiseSchedule = DEFAULT_SCHEDULE) -> np.ndarray:
    """Iterate the denoiser on its own thresholded output, with no state sampling.

    The time argument counts down from ``T`` and stays at 1 once exhausted.
    ``steps=1`` is a single denoiser pass.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    image = as_image(image)
    mask = as_mask(coarse, "coarse")
    check_same_shape(("image", image), ("coarse", mask))
    for i in range(steps):
        t = max(schedule.T - i, 1)
        mask = denoise(denoiser, image, mask, t).predicted_fine
    return mask
