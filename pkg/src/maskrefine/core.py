"""Shared types, the noise schedule and the seeded randomness contract.

Grids are plain numpy arrays, stored row-major with the origin at the top
left and indexed ``(row, column)``:

* binary masks are ``uint8`` arrays of shape ``(H, W)`` holding 0 or 1;
* state maps are ``uint8`` arrays of shape ``(H, W)`` holding :data:`FINE`
  (0) or :data:`COARSE` (1), i.e. the index of the hot entry of the
  one-hot state vector;
* probability maps are ``float64`` arrays of shape ``(H, W)`` in [0, 1];
* images are ``float64`` arrays of shape ``(H, W)`` or ``(H, W, C)`` with
  ``C`` in {1, 3} and values in [0, 1].

The ``as_*`` helpers validate and normalise inputs at module boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fractions import Fraction

import numpy as np

FINE = 0
COARSE = 1


class ShapeMismatchError(ValueError):
    """Raised when grids that must share dimensions do not."""


def as_mask(mask, name="mask"):
    arr = np.asarray(mask)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D grid, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} labels must be exactly 0 or 1")
    return arr.astype(np.uint8, copy=False)


def as_states(states, name="states"):
    arr = np.asarray(states)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D grid, got shape {arr.shape}")
    if not np.all((arr == FINE) | (arr == COARSE)):
        raise ValueError(f"{name} must hold only FINE (0) or COARSE (1)")
    return arr.astype(np.uint8, copy=False)


def as_probability_map(probs, name="probs"):
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D grid, got shape {arr.shape}")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} values must lie in [0, 1]")
    return arr


def as_image(image, name="image"):
    """Return ``image`` as float64 ``(H, W, C)`` with ``C`` in {1, 3}."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValueError(f"{name} must be (H, W), (H, W, 1) or (H, W, 3), got {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must be non-empty")
    if np.any(~np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} values must lie in [0, 1]")
    return arr


def check_same_shape(*named):
    """Raise :class:`ShapeMismatchError` unless all ``(name, array)`` pairs share (H, W)."""
    shapes = [(name, np.shape(arr)[:2]) for name, arr in named]
    ref_name, ref = shapes[0]
    for name, shape in shapes[1:]:
        if shape != ref:
            raise ShapeMismatchError(f"{name} has shape {shape}, expected {ref} (as {ref_name})")


@dataclass(frozen=True)
class NoiseSchedule:
    """Cumulative fine-state retention ``bar_beta[0..T]``.

    ``bar_beta[t]`` is the probability that a pixel is still in the fine
    state after ``t`` forward steps.
    """

    bar_beta: tuple

    def __post_init__(self):
        bb = tuple(float(b) for b in self.bar_beta)
        object.__setattr__(self, "bar_beta", bb)
        if len(bb) < 2:
            raise ValueError("schedule needs at least T=1 step")
        if bb[0] != 1.0 or bb[-1] != 0.0:
            raise ValueError("schedule must start at 1 and end at 0")
        for prev, cur in zip(bb, bb[1:]):
            if not cur < prev:
                raise ValueError("schedule must be strictly decreasing")

    @property
    def T(self) -> int:
        return len(self.bar_beta) - 1

    def check_step(self, t) -> int:
        if not (1 <= int(t) <= self.T) or int(t) != t:
            raise ValueError(f"step {t} outside [1, {self.T}]")
        return int(t)

    def retention(self, t) -> float:
        return step_retention(self, t)


def make_linear_schedule(T: int = 6, start: float = 0.8) -> NoiseSchedule:
    """Linear ``bar_beta`` from ``start`` at ``t=1`` down to 0 at ``t=T``.

    >>> make_linear_schedule(2, 0.5).bar_beta
    (1.0, 0.5, 0.0)
    """
    if int(T) != T or T < 1:
        raise ValueError(f"T must be an integer >= 1, got {T}")
    if not 0.0 < start < 1.0:
        raise ValueError(f"start must lie in (0, 1), got {start}")
    T = int(T)
    if T == 1:
        return NoiseSchedule((1.0, 0.0))
    # exact rational arithmetic on the decimal value of start, rounded once,
    # so 0.8 * 3/5 comes out as the double nearest 0.48
    exact = Fraction(repr(float(start)))
    interior = [float(exact * (T - t) / (T - 1)) for t in range(1, T + 1)]
    return NoiseSchedule((1.0, *interior))


def step_retention(schedule: NoiseSchedule, t: int) -> float:
    """Per-step retention ``beta_t = bar_beta[t] / bar_beta[t-1]``."""
    t = schedule.check_step(t)
    return schedule.bar_beta[t] / schedule.bar_beta[t - 1]


DEFAULT_SCHEDULE = make_linear_schedule(6, 0.8)


@dataclass(frozen=True)
class RngStream:
    """Deterministic random substream addressed by ``(seed, path)``.

    Each stream drives a Philox counter-based generator keyed through
    ``numpy.random.SeedSequence(seed, spawn_key=path)``, so the values drawn
    depend only on the address, never on call order elsewhere. Grids are
    always filled row-major, which makes the draw for pixel ``k`` the
    ``k``-th value of its stream.
    """

    seed: int = 0
    path: tuple = field(default_factory=tuple)

    def __post_init__(self):
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        path = tuple(int(p) for p in self.path)
        if any(not 0 <= p < 2**64 for p in path):
            raise ValueError("path indices must be 64-bit unsigned integers")
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "path", path)

    def child(self, *indices) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(indices))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))

    def uniform(self, shape) -> np.ndarray:
        """Uniform draws on the open interval (0, 1)."""
        u = self.generator().random(shape)
        return np.maximum(u, np.finfo(np.float64).tiny)


def gumbel_choose_first(p_first, rng: RngStream) -> np.ndarray:
    """Gumbel-max choice between two categories with probabilities ``(p, 1-p)``.

    Returns a boolean array, True where the first category wins. Category
    scores are ``log p + g`` with independent standard Gumbel noise ``g``;
    the result is distributed exactly as ``Bernoulli(p)``.
    """
    p = np.asarray(p_first, dtype=np.float64)
    u = rng.uniform(p.shape + (2,))
    g = -np.log(-np.log(u))
    with np.errstate(divide="ignore"):
        s_first = np.log(p) + g[..., 0]
        s_second = np.log1p(-p) + g[..., 1]
    return s_first > s_second
