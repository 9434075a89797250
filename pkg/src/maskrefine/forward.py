"""Unidirectional forward process: fine pixels decay into the coarse state.

A pixel in the fine state takes its value from the fine mask, a pixel in
the coarse state from the coarse mask. Coarse is absorbing, so a forward
trajectory always ends at the coarse mask once ``bar_beta[T] == 0``.
"""

from __future__ import annotations

import numpy as np

from .core import (
    COARSE,
    FINE,
    NoiseSchedule,
    RngStream,
    as_mask,
    as_states,
    check_same_shape,
    gumbel_choose_first,
)


def forward_matrix(beta_t: float) -> np.ndarray:
    """Forward transition matrix ``[[beta, 1-beta], [0, 1]]`` (rows: current state)."""
    if not 0.0 <= beta_t <= 1.0:
        raise ValueError(f"beta_t must lie in [0, 1], got {beta_t}")
    return np.array([[beta_t, 1.0 - beta_t], [0.0, 1.0]])


def marginal_matrix(schedule: NoiseSchedule, t: int) -> np.ndarray:
    """Cumulative matrix ``Q_1 Q_2 ... Q_t`` in closed form."""
    t = schedule.check_step(t) if t else 0
    return forward_matrix(schedule.bar_beta[t])


def sample_step(states, beta_t: float, rng: RngStream) -> np.ndarray:
    """One forward step: each FINE pixel stays FINE with probability ``beta_t``."""
    states = as_states(states)
    row_fine = forward_matrix(beta_t)[FINE]
    keep = gumbel_choose_first(np.full(states.shape, row_fine[FINE]), rng)
    out = np.full(states.shape, COARSE, dtype=np.uint8)
    out[(states == FINE) & keep] = FINE
    return out


def sample_marginal(schedule: NoiseSchedule, t: int, width: int, height: int,
                    rng: RngStream) -> np.ndarray:
    """Sample ``x_t`` directly from ``x_0 = FINE`` everywhere."""
    t = schedule.check_step(t)
    keep = gumbel_choose_first(np.full((height, width), schedule.bar_beta[t]), rng)
    return np.where(keep, FINE, COARSE).astype(np.uint8)


def compose_mask(states, fine_source, coarse_source) -> np.ndarray:
    """Take ``fine_source`` where the state is FINE and ``coarse_source`` elsewhere."""
    states = as_states(states)
    fine_source = as_mask(fine_source, "fine_source")
    coarse_source = as_mask(coarse_source, "coarse_source")
    check_same_shape(("states", states), ("fine_source", fine_source),
                     ("coarse_source", coarse_source))
    return np.where(states == FINE, fine_source, coarse_source).astype(np.uint8)


def forward_trajectory(gt, coarse, schedule: NoiseSchedule, rng: RngStream,
                       return_states: bool = False):
    """Degrade ``gt`` into ``coarse`` step by step.

    Returns the list ``[m_0, ..., m_T]`` (and the matching state maps when
    ``return_states`` is set). Step ``t`` draws from ``rng.child(t)``.
    """
    gt = as_mask(gt, "gt")
    coarse = as_mask(coarse, "coarse")
    check_same_shape(("gt", gt), ("coarse", coarse))
    states = np.full(gt.shape, FINE, dtype=np.uint8)
    masks = [gt.copy()]
    all_states = [states]
    for t in range(1, schedule.T + 1):
        states = sample_step(states, schedule.retention(t), rng.child(t))
        masks.append(compose_mask(states, gt, coarse))
        all_states.append(states)
    if return_states:
        return masks, all_states
    return masks
