#!/usr/bin/env python
"""Tests for the channel_model module."""

import numpy as np
import pytest

from ..channel_model import SPEED_OF_LIGHT, doppler_alpha, draw_channels, evolve, split_estimate
from ..config import NetworkConfig
from ..linalg_helpers import complex_normal


@pytest.fixture
def wide_config():
    """Four links with 10**4 entries each."""
    return NetworkConfig(B=1, K=4, M=100, N=100, d=1, delta_e=0.05, seed=3)


def test_doppler_alpha():
    assert doppler_alpha(0., 2e9, 66.7e-6) == 1.
    cfg = NetworkConfig()
    assert abs(doppler_alpha(cfg.v, cfg.f_c, cfg.Omega) - 0.99999624) < 1e-7
    first_root = 2.404825557695773
    assert abs(doppler_alpha(first_root / (2 * np.pi), SPEED_OF_LIGHT, 1.)) < 1e-8
    with pytest.raises(ValueError):
        doppler_alpha(-1., 2e9, 66.7e-6)


def test_draw_channels_deterministic(small_config):
    first = draw_channels(small_config, np.random.default_rng(small_config.seed))
    second = draw_channels(small_config, np.random.default_rng(small_config.seed))
    assert first.shape == (2, 2, 2, 2, 6)
    assert np.array_equal(first.true, second.true)
    assert np.array_equal(first.estimate, second.estimate)


def test_split_estimate(rng):
    H = complex_normal(rng, (100, 100))
    H_hat, Delta = split_estimate(H, 0., rng)
    assert np.array_equal(H_hat, H)
    assert np.all(Delta == 0)

    H_hat, Delta = split_estimate(H, 0.05, rng, 'per_entry')
    assert abs(np.mean(np.abs(Delta) ** 2) / 0.0025 - 1) < 0.05
    assert np.allclose(H_hat + Delta, H, rtol=0, atol=1e-14)

    H_hat, Delta = split_estimate(H, 0.05, rng, 'gram_identity')
    assert abs(np.mean(np.abs(Delta) ** 2) / (0.0025 / 100) - 1) < 0.05

    with pytest.raises(ValueError):
        split_estimate(H, 0.05, rng, 'bogus')


def test_evolve_limits(wide_config, rng):
    channels = draw_channels(wide_config, rng)
    assert np.array_equal(evolve(channels, 1., rng).true, channels.true)

    fresh = evolve(channels, 0., rng).true.ravel()
    previous = channels.true.ravel()
    correlation = np.abs(np.vdot(previous, fresh)) / (np.linalg.norm(previous) * np.linalg.norm(fresh))
    assert correlation < 0.05

    with pytest.raises(ValueError):
        evolve(channels, 1.5, rng)


def test_evolve_statistics(rng):
    alpha = 0.9
    cfg = NetworkConfig(B=1, K=1, M=8, N=4, d=1, delta_e=0.05)
    channels = draw_channels(cfg, rng)
    history = []
    for step in range(10000):
        channels = evolve(channels, alpha, rng)
        history.append(channels.true.ravel())
    history = np.array(history)
    assert abs(np.mean(np.abs(history) ** 2) - 1) < 0.03
    for lag in (1, 2, 5):
        earlier, later = history[:-lag], history[lag:]
        correlation = np.real(np.vdot(earlier, later)) / np.vdot(earlier, earlier).real
        assert abs(correlation / alpha ** lag - 1) < 0.1
