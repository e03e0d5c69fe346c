#!/usr/bin/env python
"""Tests for the outer_beamformer module."""

import numpy as np
import pytest

from ..channel_model import draw_channels
from ..config import NetworkConfig
from ..linalg_helpers import (compact_svd, complex_normal, minor_subspace, random_orthonormal,
                              subspace_distance)
from ..outer_beamformer import (CGGMOptions, SMGateState, armijo_tau, cggm, conjugate_direction,
                                geodesic, horizontal_gradient, interference_covariance,
                                rayleigh_quotient, sm_update, transport)


def random_hermitian(rng, n):
    A = complex_normal(rng, (n, n))
    return A + A.conj().T


def horizontal(rng, F):
    T = complex_normal(rng, F.shape)
    return T - F @ (F.conj().T @ T)


def test_interference_covariance(rng):
    assert np.all(interference_covariance(np.zeros((0, 4, 2, 6)), 0.1) == 0)

    H = np.eye(3)[None, None]
    assert np.allclose(interference_covariance(H, 0.1), 1.01 * np.eye(3))

    H = complex_normal(rng, (2, 3, 2, 5))
    Phi = interference_covariance(H, 0.2)
    naive = np.zeros((5, 5), dtype=complex)
    for b in range(2):
        for i in range(3):
            naive += H[b, i].conj().T @ H[b, i]
    naive += 6 * 0.04 * np.eye(5)
    assert np.linalg.norm(Phi - naive) < 1e-12 * np.linalg.norm(naive)
    assert np.all(np.linalg.eigvalsh(Phi) > 0)

    printed = interference_covariance(H[:1, :2], 0.2, 'printed')
    # (B K - 1) with B=2, K=2
    assert np.allclose(printed - interference_covariance(H[:1, :2], 0.), 3 * 0.04 * np.eye(5))
    with pytest.raises(ValueError):
        interference_covariance(H, 0.2, 'other')


def test_rayleigh_quotient(rng):
    F = random_orthonormal(rng, 6, 2)
    assert np.isclose(rayleigh_quotient(F, np.eye(6)), 2.)
    assert np.isclose(rayleigh_quotient(np.eye(5)[:, 3:], np.diag([5., 4., 3., 2., 1.])), 3.)
    Phi = random_hermitian(rng, 8)
    values = np.linalg.eigvalsh(Phi)
    J = rayleigh_quotient(random_orthonormal(rng, 8, 3), Phi)
    assert 3 * values[0] <= J <= 3 * values[-1]


def test_horizontal_gradient(rng):
    Phi = random_hermitian(rng, 6)
    assert np.linalg.norm(horizontal_gradient(minor_subspace(Phi, 2), Phi)) < 1e-9
    F = random_orthonormal(rng, 6, 2)
    assert np.linalg.norm(horizontal_gradient(F, 0.5 * np.eye(6))) < 1e-13

    Xi = horizontal_gradient(F, Phi)
    assert np.linalg.norm(F.conj().T @ Xi) < 1e-10

    T = horizontal(rng, F)
    h = 1e-6
    numeric = (rayleigh_quotient(F + h * T, Phi) - rayleigh_quotient(F - h * T, Phi)) / (2 * h)
    analytic = np.real(np.vdot(T, Xi))
    assert abs(numeric - analytic) < 1e-5 * max(1., abs(analytic))


def test_geodesic(rng):
    F = random_orthonormal(rng, 8, 3)
    Theta = horizontal(rng, F)
    svd = compact_svd(Theta)
    assert np.linalg.norm(geodesic(F, svd, 0.) - F) < 1e-12
    assert np.linalg.norm(geodesic(F, compact_svd(np.zeros_like(F)), 0.7) - F) < 1e-12
    F_tau = geodesic(F, svd, 0.3)
    assert np.linalg.norm(F_tau.conj().T @ F_tau - np.eye(3)) < 1e-10


def test_transport(rng):
    F = random_orthonormal(rng, 8, 3)
    Theta = horizontal(rng, F)
    Xi = horizontal(rng, F)
    svd = compact_svd(Theta)

    Theta_t, Xi_t = transport(F, svd, Xi, 0.)
    assert np.linalg.norm(Theta_t - Theta) < 1e-12
    assert np.linalg.norm(Xi_t - Xi) < 1e-12

    Xi_perp = Xi - svd.left @ (svd.left.conj().T @ Xi)
    _, Xi_t = transport(F, svd, Xi_perp, 0.4)
    assert np.linalg.norm(Xi_t - Xi_perp) < 1e-12

    Theta_t, Xi_t = transport(F, svd, Xi, 0.4)
    F_tau = geodesic(F, svd, 0.4)
    assert np.linalg.norm(F_tau.conj().T @ Theta_t) <= 1e-8 * np.linalg.norm(Theta_t)
    assert np.linalg.norm(F_tau.conj().T @ Xi_t) <= 1e-8 * np.linalg.norm(Xi_t)


def test_conjugate_direction(rng):
    F = random_orthonormal(rng, 6, 2)
    Xi_new = horizontal(rng, F)
    Xi_old = horizontal(rng, F)

    Theta, w = conjugate_direction(Xi_new, Xi_new, horizontal(rng, F), Xi_old)
    assert w == 0. and np.array_equal(Theta, -Xi_new)

    Theta, w = conjugate_direction(Xi_new, np.zeros_like(Xi_new), -Xi_new, Xi_old)
    expected = np.vdot(Xi_new, Xi_new).real / np.vdot(Xi_old, Xi_old).real
    assert np.isclose(w, expected, rtol=1e-12)
    assert np.linalg.norm(Theta + (1 + expected) * Xi_new) < 1e-12 * np.linalg.norm(Theta)

    Xi_translated = 0.1 * horizontal(rng, F)
    Theta, w = conjugate_direction(Xi_new, Xi_translated, -Xi_new, Xi_old)
    naive = np.trace((Xi_new - Xi_translated).conj().T @ Xi_new).real / \
        np.trace(Xi_old.conj().T @ Xi_old).real
    assert abs(w - naive) < 1e-12 * max(1., abs(naive))
    assert np.real(np.vdot(Xi_new, Theta)) < 0


def test_armijo_tau(rng):
    Phi = random_hermitian(rng, 8)
    F = random_orthonormal(rng, 8, 3)
    Xi = horizontal_gradient(F, Phi)
    Theta = -Xi
    tau = armijo_tau(F, Theta, Phi, 0.1, 2., 1.)
    assert tau > 0
    F_tau = geodesic(F, compact_svd(Theta), tau)
    slope = np.real(np.vdot(Xi, Theta))
    assert rayleigh_quotient(F_tau, Phi) <= rayleigh_quotient(F, Phi) + 0.1 * tau * slope

    assert armijo_tau(F, np.zeros_like(F), Phi, tau0=0.7) == 0.7

    tau, direction, svd = armijo_tau(F, Xi, Phi, return_direction=True)
    assert np.allclose(direction, -Xi)
    assert rayleigh_quotient(geodesic(F, svd, tau), Phi) < rayleigh_quotient(F, Phi)


def test_armijo_single_eigendirection():
    Phi = np.diag([3., 2., 1.])
    F = np.array([[np.cos(0.3)], [0.], [np.sin(0.3)]], dtype=complex)
    tau = armijo_tau(F, -horizontal_gradient(F, Phi), Phi)
    F_tau = geodesic(F, compact_svd(-horizontal_gradient(F, Phi)), tau)
    assert rayleigh_quotient(F_tau, Phi) < rayleigh_quotient(F, Phi)


def test_cggm_diagonal(rng):
    Phi = np.diag([5., 4., 3., 2., 1.])
    opts = CGGMOptions(grad_tol=1e-6, tol=1e-9, max_iter=500)
    state = cggm(Phi, random_orthonormal(rng, 5, 2), opts)
    assert state.converged
    assert abs(state.J - 3.) < 1e-8
    assert subspace_distance(state.F, np.eye(5)[:, 3:]) < 1e-4


def test_cggm_isotropic(rng):
    state = cggm(2. * np.eye(6), random_orthonormal(rng, 6, 3))
    assert state.converged and state.iterations == 1
    assert np.isclose(state.J, 6.)


def test_cggm_oracle():
    hits = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        Phi = random_hermitian(rng, 8)
        state = cggm(Phi, random_orthonormal(rng, 8, 3))
        oracle = np.sort(np.linalg.eigvalsh(Phi))[:3].sum()
        assert state.J >= oracle - 1e-9
        assert np.all(np.diff(state.J_trace) <= 1e-10)
        assert np.linalg.norm(state.F.conj().T @ state.F - np.eye(3)) < 1e-10
        if abs(state.J - oracle) <= 1e-3 * max(abs(oracle), 1.):
            hits += 1
    assert hits >= 48


@pytest.mark.parametrize('seed', range(10))
def test_cggm_on_network_covariance(seed):
    cfg = NetworkConfig(seed=seed)
    rng = np.random.default_rng(seed)
    H_hat = draw_channels(cfg, rng).estimate
    Phi = interference_covariance(H_hat[1:, :, 0], cfg.delta_e)
    F0 = random_orthonormal(rng, cfg.M, cfg.m_b)
    state = cggm(Phi, F0, CGGMOptions.from_config(cfg))
    assert np.all(np.diff(state.J_trace) <= 1e-10 * state.J_trace[0])
    assert state.J < rayleigh_quotient(F0, Phi)
    assert state.J >= np.sort(np.linalg.eigvalsh(Phi))[:cfg.m_b].sum() - 1e-9 * state.J
    assert np.linalg.norm(state.F.conj().T @ state.F - np.eye(cfg.m_b)) <= 1e-10


def test_sm_update_gate(rng):
    F0 = random_orthonormal(rng, 2, 1)
    with pytest.raises(ValueError):
        sm_update(np.eye(2), SMGateState(threshold=0.25))

    gate = SMGateState(threshold=0.25)
    F, updated = sm_update(np.diag([2., 1.]), gate, F0=F0)
    assert updated and gate.update_count == 1
    F, updated = sm_update(np.diag([2.25, 1.]), gate)
    assert not updated and gate.hold_count == 1
    F, updated = sm_update(np.diag([2.5, 1.]), gate)
    assert updated and gate.update_count == 2
    assert np.array_equal(gate.Phi_prev, np.diag([2.5, 1.]))

    always = SMGateState(threshold=0.)
    for t in range(4):
        _, updated = sm_update(np.diag([2., 1.]), always, F0=F0)
        assert updated
    assert always.update_count == 4

    relative = SMGateState(eta=0.05)
    sm_update(np.diag([2., 1.]), relative, F0=F0)
    F_held, updated = sm_update(np.diag([2., 1.]), relative)
    assert not updated
    assert F_held is relative.F_prev


def test_sm_gate_never_updates_after_first(rng):
    gate = SMGateState(threshold=np.inf)
    F0 = random_orthonormal(rng, 4, 2)
    for t in range(5):
        sm_update(random_hermitian(rng, 4), gate, F0=F0)
    assert gate.update_count == 1 and gate.hold_count == 4
    with pytest.raises(ValueError):
        SMGateState(threshold=-1.)
