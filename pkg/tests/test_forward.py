import numpy as np
import pytest

from maskrefine.core import COARSE, FINE, RngStream
from maskrefine.forward import (
    compose_mask,
    forward_matrix,
    forward_trajectory,
    sample_marginal,
    sample_step,
)


@pytest.mark.parametrize("beta,expected", [
    (1.0, [[1, 0], [0, 1]]),
    (0.0, [[0, 1], [0, 1]]),
    (0.75, [[0.75, 0.25], [0, 1]]),
])
def test_forward_matrix(beta, expected):
    q = forward_matrix(beta)
    np.testing.assert_array_equal(q, expected)
    np.testing.assert_allclose(q.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("beta", [-0.1, 1.1])
def test_forward_matrix_range(beta):
    with pytest.raises(ValueError):
        forward_matrix(beta)


def test_sample_step_absorbing_and_identity():
    rng = RngStream(1)
    coarse = np.full((20, 20), COARSE, dtype=np.uint8)
    for beta in (0.0, 0.5, 1.0):
        assert (sample_step(coarse, beta, rng) == COARSE).all()
    fine = np.full((20, 20), FINE, dtype=np.uint8)
    assert (sample_step(fine, 1.0, rng) == FINE).all()
    assert (sample_step(fine, 0.0, rng) == COARSE).all()


def test_sample_step_rate():
    # Monte Carlo against the Bernoulli mean
    states = np.zeros((1000, 1000), dtype=np.uint8)
    out = sample_step(states, 0.75, RngStream(11))
    assert (out == FINE).mean() == pytest.approx(0.75, abs=0.002)


def test_sample_step_matches_uniform_threshold_in_distribution():
    # Gumbel-max and a uniform threshold are different draws of the same law
    states = np.zeros((400, 500), dtype=np.uint8)
    fracs = [(sample_step(states, 0.4, RngStream(s)) == FINE).mean() for s in range(5)]
    thresh = [(np.random.default_rng(s).random((400, 500)) < 0.4).mean() for s in range(5)]
    assert np.mean(fracs) == pytest.approx(np.mean(thresh), abs=0.003)


def test_sample_marginal(schedule):
    assert (sample_marginal(schedule, 6, 50, 40, RngStream(0)) == COARSE).all()
    for t in (1, 3):
        frac = (sample_marginal(schedule, t, 1000, 1000, RngStream(t)) == FINE).mean()
        assert frac == pytest.approx(schedule.bar_beta[t], abs=0.002)
    with pytest.raises(ValueError):
        sample_marginal(schedule, 0, 4, 4, RngStream(0))


def test_sample_marginal_shape(schedule):
    assert sample_marginal(schedule, 2, width=7, height=3, rng=RngStream(0)).shape == (3, 7)


def test_compose_mask():
    fine = np.ones((4, 4), dtype=np.uint8)
    coarse = np.zeros((4, 4), dtype=np.uint8)
    all_fine = np.zeros((4, 4), dtype=np.uint8)
    assert np.array_equal(compose_mask(all_fine, fine, coarse), fine)
    assert np.array_equal(compose_mask(1 - all_fine, fine, coarse), coarse)
    checker = (np.indices((4, 4)).sum(axis=0) % 2).astype(np.uint8)
    assert np.array_equal(compose_mask(checker, fine, coarse), 1 - checker)
    with pytest.raises(ValueError):
        compose_mask(all_fine, fine, np.zeros((3, 4), dtype=np.uint8))


def test_trajectory_endpoints(gen, schedule):
    gt = (gen.random((30, 30)) < 0.5).astype(np.uint8)
    coarse = (gen.random((30, 30)) < 0.5).astype(np.uint8)
    for seed in range(5):
        masks = forward_trajectory(gt, coarse, schedule, RngStream(seed))
        assert len(masks) == schedule.T + 1
        assert np.array_equal(masks[0], gt)
        assert np.array_equal(masks[-1], coarse)
    same = forward_trajectory(gt, gt, schedule, RngStream(0))
    assert all(np.array_equal(m, gt) for m in same)


def test_trajectory_unidirectional_and_sourced(gen, schedule):
    gt = (gen.random((25, 25)) < 0.5).astype(np.uint8)
    coarse = 1 - gt
    masks, states = forward_trajectory(gt, coarse, schedule, RngStream(4), return_states=True)
    for prev, cur in zip(states, states[1:]):
        assert not np.any((prev == COARSE) & (cur == FINE))
    for m, s in zip(masks, states):
        assert np.array_equal(m, np.where(s == FINE, gt, coarse))


def test_trajectory_disagreement_count(schedule):
    # binomial expectation (1 - bar_beta_t) * N with a 3-sigma bound on the mean over seeds
    gt = np.ones((100, 100), dtype=np.uint8)
    coarse = np.zeros((100, 100), dtype=np.uint8)
    n_seeds, n = 1000, gt.size
    counts = np.zeros((n_seeds, schedule.T + 1))
    for seed in range(n_seeds):
        masks = forward_trajectory(gt, coarse, schedule, RngStream(seed))
        counts[seed] = [np.count_nonzero(m != gt) for m in masks]
    for t in range(schedule.T + 1):
        q = 1 - schedule.bar_beta[t]
        sigma = np.sqrt(n * q * (1 - q) / n_seeds)
        assert abs(counts[:, t].mean() - q * n) <= 3 * sigma + 1e-9


def test_trajectory_deterministic(gen, schedule):
    gt = (gen.random((16, 16)) < 0.5).astype(np.uint8)
    coarse = 1 - gt
    a = forward_trajectory(gt, coarse, schedule, RngStream(9, (2,)))
    b = forward_trajectory(gt, coarse, schedule, RngStream(9, (2,)))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_trajectory_shape_mismatch(schedule):
    with pytest.raises(ValueError):
        forward_trajectory(np.zeros((3, 3)), np.zeros((3, 4)), schedule, RngStream(0))
