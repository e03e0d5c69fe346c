#!/usr/bin/env python
"""Tests for the inner_beamformer module."""

import warnings

import numpy as np
import pytest

from ..channel_model import draw_channels
from ..config import NetworkConfig
from ..exceptions import InfeasibleSLNRError, NoConvergenceWarning
from ..inner_beamformer import (CellGrams, beamforming_directions, effective_gram, inner_objective,
                                leakage_matrix, lif, slnr, solve_inner, solve_slnr_powers,
                                update_multipliers)
from ..linalg_helpers import complex_normal, random_orthonormal, subspace_distance


def projector(V):
    return V @ V.conj().T


@pytest.fixture
def single_cell():
    """One cell, two users, leakage null space available inside F."""
    cfg = NetworkConfig(B=1, K=2, M=6, N=2, m_b=4, delta_e=0.05, seed=21)
    rng = np.random.default_rng(cfg.seed)
    channels = draw_channels(cfg, rng)
    F = random_orthonormal(rng, cfg.M, cfg.m_b)
    return cfg, CellGrams.from_channels(channels, 0, cfg.delta_e), F


@pytest.fixture
def two_cells(rng):
    cfg = NetworkConfig(B=2, K=3, M=8, N=2, m_b=6, delta_e=0.1, seed=5)
    channels = draw_channels(cfg, rng)
    F = random_orthonormal(rng, cfg.M, cfg.m_b)
    return cfg, CellGrams.from_channels(channels, 1, cfg.delta_e), F, rng


def test_effective_gram(rng):
    H = complex_normal(rng, (2, 5))
    assert np.allclose(effective_gram(H, 0.), H.conj().T @ H)
    assert np.allclose(effective_gram(np.eye(3), 0.1), 1.01 * np.eye(3))
    shifted = np.linalg.eigvalsh(effective_gram(H, 0.2))
    assert np.allclose(shifted, np.linalg.eigvalsh(H.conj().T @ H) + 0.04, atol=1e-10)


def test_cell_grams_from_channels(rng):
    cfg = NetworkConfig(B=3, K=2, M=6, N=2, delta_e=0.1)
    channels = draw_channels(cfg, rng)
    grams = CellGrams.from_channels(channels, 1, cfg.delta_e)
    assert grams.user.shape == (2, 6, 6)
    assert np.allclose(grams.user[0], effective_gram(channels.estimate[1, 0, 1], 0.1))
    inter = np.zeros((6, 6), dtype=complex)
    for b in (0, 2):
        for k in range(2):
            inter += effective_gram(channels.estimate[b, k, 1], 0.1)
    assert np.linalg.norm(grams.inter - inter) < 1e-12 * np.linalg.norm(inter)


def test_leakage_matrix_empty():
    grams = CellGrams(np.eye(3)[None], np.zeros((3, 3)))
    A = leakage_matrix(0, np.ones(1), np.eye(3), grams, 1.)
    assert np.allclose(A, 1e-9 / 3 * np.eye(3), rtol=0, atol=1e-20)


def test_leakage_matrix_symmetric_and_brute_force(two_cells, rng):
    cfg, grams, F, _ = two_cells
    G = grams.user[0]
    twins = CellGrams(np.stack([G, G]), grams.inter)
    A0 = leakage_matrix(0, np.ones(2), F, twins, 1.)
    A1 = leakage_matrix(1, np.ones(2), F, twins, 1.)
    assert np.linalg.norm(A0 - A1) < 1e-12

    multipliers = rng.uniform(0.5, 2., size=3)
    delta2 = 0.7
    A = leakage_matrix(0, multipliers, F, grams, delta2)
    S = np.zeros((6, 6), dtype=complex)
    for j in (1, 2):
        S += (delta2 + multipliers[j]) / delta2 * F.conj().T @ (grams.user[j] + grams.inter) @ F
    eps = 1e-9 * (1 + np.trace(S).real) / 6
    assert np.linalg.norm(A - S - eps * np.eye(6)) < 1e-12 * np.linalg.norm(S)


def test_directions_matched_filter(rng):
    H = complex_normal(rng, (2, 4))
    grams = CellGrams(effective_gram(H, 0.)[None], np.zeros((4, 4)))
    F = random_orthonormal(rng, 4, 3)
    V = beamforming_directions(np.ones(1), F, grams, 1.)[0]
    _, vectors = np.linalg.eigh(F.conj().T @ grams.user[0] @ F)
    assert subspace_distance(V, vectors[:, -1:]) < 1e-9
    assert abs(np.linalg.norm(V) - 1) < 1e-12


def test_directions_properties(two_cells):
    cfg, grams, F, rng = two_cells
    multipliers = np.ones(3)
    directions = beamforming_directions(multipliers, F, grams, 1., d=2)
    for V in directions:
        assert V.shape == (6, 2)
        assert np.allclose(np.linalg.norm(V, axis=0), 1, atol=1e-12)

    scaled = beamforming_directions(multipliers, F, grams.scaled(3.7), 1., d=2)
    for V, W in zip(directions, scaled):
        assert np.linalg.norm(projector(V) - projector(W)) < 1e-7

    swapped = CellGrams(grams.user[[1, 0, 2]], grams.inter)
    mirrored = beamforming_directions(multipliers, F, swapped, 1., d=2)
    assert np.linalg.norm(projector(directions[0]) - projector(mirrored[1])) < 1e-9
    assert np.linalg.norm(projector(directions[1]) - projector(mirrored[0])) < 1e-9


def test_slnr_powers_single_user(rng):
    H = complex_normal(rng, (2, 4))
    grams = CellGrams(effective_gram(H, 0.)[None], np.zeros((4, 4)))
    F = random_orthonormal(rng, 4, 2)
    directions = beamforming_directions(np.ones(1), F, grams, 1.)
    powers, limited = solve_slnr_powers(directions, F, grams, 2., 0.5, 1e6)
    gain = np.real(np.trace(directions[0].conj().T @ F.conj().T @ grams.user[0] @ F @ directions[0]))
    assert not limited
    assert np.isclose(powers[0], 0.5 * 2. / gain, rtol=1e-12)


def test_slnr_powers_symmetric_and_plug_back(single_cell):
    cfg, grams, F = single_cell
    twins = CellGrams(np.stack([grams.user[0], grams.user[0]]), grams.inter)
    directions = beamforming_directions(np.ones(2), F, twins, 1.)
    powers, _ = solve_slnr_powers(directions, F, twins, 0.5, 1., 1e6)
    assert abs(powers[0] - powers[1]) < 1e-10 * powers[0]

    directions = beamforming_directions(np.ones(2), F, grams, 1.)
    powers, limited = solve_slnr_powers(directions, F, grams, 1.5, 1., 1e6)
    assert not limited
    for k in range(2):
        assert abs(slnr(k, directions, powers, F, grams, 1.) / 1.5 - 1) < 1e-8

    small, limited = solve_slnr_powers(directions, F, grams, 1.5, 1., 1e-3)
    assert limited
    assert np.isclose(small.sum(), 1e-3)
    assert np.allclose(small / powers, small[0] / powers[0])


def test_slnr_powers_sinr_variant(single_cell):
    cfg, grams, F = single_cell
    directions = beamforming_directions(np.ones(2), F, grams, 1.)
    powers, limited = solve_slnr_powers(directions, F, grams, 0.5, 1., 1e6, constraint='sinr')
    assert np.all(powers > 0) and not limited
    with pytest.raises(ValueError):
        solve_slnr_powers(directions, F, grams, 0.5, 1., 1e6, constraint='other')


def test_slnr_powers_infeasible(single_cell):
    cfg, grams, F = single_cell
    directions = beamforming_directions(np.ones(2), F, grams, 1.)
    with pytest.raises(InfeasibleSLNRError):
        solve_slnr_powers(directions, F, grams, 1e12, 1., 1e6)


def test_update_multipliers():
    multipliers, converged = update_multipliers([1., 2.], [3., 4.], [3., 4.])
    assert np.array_equal(multipliers, [1., 2.]) and converged
    multipliers, converged = update_multipliers([1., 2.], [6., 4.], [3., 4.])
    assert np.allclose(multipliers, [0.5, 2.]) and not converged
    multipliers, _ = update_multipliers([1.], [0.], [3.])
    assert np.allclose(multipliers, [2.])


def test_slnr_and_lif_trivial(rng):
    H = complex_normal(rng, (2, 4))
    grams = CellGrams(effective_gram(H, 0.)[None], np.zeros((4, 4)))
    F = random_orthonormal(rng, 4, 2)
    directions = beamforming_directions(np.ones(1), F, grams, 1.)
    assert slnr(0, directions, np.zeros(1), F, grams, 1.) == 0.
    gain = np.real(np.trace(directions[0].conj().T @ F.conj().T @ grams.user[0] @ F @ directions[0]))
    assert np.isclose(slnr(0, directions, np.array([2.]), F, grams, 0.5), 2. * gain / 0.5)
    assert lif(0, directions, np.array([2.]), F, grams) == (0., 0.)


def test_lif_null_space():
    e = np.eye(3)
    user = np.stack([np.outer(e[2], e[2]), np.outer(e[0], e[0])])
    grams = CellGrams(user, np.zeros((3, 3)))
    directions = [e[:, 1:2], e[:, 2:3]]
    iui, ici = lif(0, directions, np.ones(2), np.eye(3), grams)
    assert iui == 0. and ici == 0.


def test_lif_brute_force(two_cells):
    cfg, grams, F, rng = two_cells
    directions = beamforming_directions(np.ones(3), F, grams, 1.)
    powers = rng.uniform(0.1, 1., size=3)
    total_iui = 0.
    for k in range(3):
        iui, ici = lif(k, directions, powers, F, grams)
        FV = np.sqrt(powers[k]) * F @ directions[k]
        naive_iui = 0.
        for j in range(3):
            if j != k:
                naive_iui += np.real(np.trace(FV.conj().T @ grams.user[j] @ FV))
        naive_ici = np.real(np.trace(FV.conj().T @ grams.inter @ FV))
        assert abs(iui - naive_iui) < 1e-12 * max(1., naive_iui)
        assert abs(ici - naive_ici) < 1e-12 * max(1., naive_ici)
        total_iui += iui
    assert abs(inner_objective(directions, powers, F, grams) - total_iui) < 1e-12 * max(1., total_iui)


def test_solve_inner_single_user(rng):
    H = complex_normal(rng, (2, 4))
    grams = CellGrams(effective_gram(H, 0.)[None], np.zeros((4, 4)))
    F = random_orthonormal(rng, 4, 2)
    solution = solve_inner(F, grams, 1., 1., 1e3)
    assert solution.iterations == 1 and solution.converged and solution.feasible
    assert abs(solution.achieved_slnr[0] - 1.) < 1e-8


def test_solve_inner_meets_targets():
    cfg = NetworkConfig(B=1, K=4, M=8, N=2, m_b=8, delta_e=0.05)
    for seed in range(5):
        rng = np.random.default_rng(seed)
        channels = draw_channels(cfg, rng)
        grams = CellGrams.from_channels(channels, 0, cfg.delta_e)
        F = random_orthonormal(rng, cfg.M, cfg.m_b)
        solution = solve_inner(F, grams, cfg.gamma_bar, cfg.delta2, 1e6)
        assert solution.converged and not solution.budget_limited
        assert np.all(np.abs(solution.achieved_slnr / cfg.gamma_bar - 1) < 1e-4)
        assert solution.powers.sum() <= 1e6
        for V in solution.directions:
            assert abs(np.linalg.norm(V) - 1) < 1e-12


def test_solve_inner_budget_limited(single_cell):
    cfg, grams, F = single_cell
    solution = solve_inner(F, grams, 1., 1., 1e-4)
    assert solution.budget_limited and not solution.converged
    assert np.isclose(solution.powers.sum(), 1e-4)
    assert np.all(solution.achieved_slnr < 1.)


def test_solve_inner_coupled_powers_update_multipliers(two_cells):
    cfg, grams, F, rng = two_cells
    start = cfg.delta2 * np.ones(cfg.K)
    directions = beamforming_directions(start, F, grams, cfg.delta2)
    powers, _ = solve_slnr_powers(directions, F, grams, 0.1, cfg.delta2, 1e6, constraint='sinr')
    achieved = [slnr(k, directions, powers, F, grams, cfg.delta2) for k in range(cfg.K)]
    multipliers, converged = update_multipliers(start, achieved, 0.1)
    assert not converged
    assert not np.allclose(multipliers, start)

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', NoConvergenceWarning)
        solution = solve_inner(F, grams, 0.1, cfg.delta2, 1e6, constraint='sinr', max_sweeps=5)
    assert solution.iterations > 1
    assert not solution.budget_limited
