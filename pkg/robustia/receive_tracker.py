"""Receive filters as tracked minor subspaces.

Each user's receive filter U (N x d) is the minor subspace of the
covariance of its training signal, tracked sample by sample with the fast
data projection method (FDPM). The plain data projection method (DPM) and
an explicit Householder form of the same step are kept as references.

Use
---

    import numpy as np
    from robustia.receive_tracker import training_samples, track
    X = training_samples(b, k, channels, network, delta2, rng, count=500)
    state = track(U0, X.T, alpha0=-0.1)
    U = state.U

"""

import numpy as np

from .linalg_helpers import complex_normal, orthonormalize

__all__ = ['NetworkBeamformers', 'TrainingSample', 'FDPMState', 'training_sample',
           'training_samples', 'received_covariance', 'householder', 'dpm_step',
           'householder_step', 'fdpm_step', 'step_size', 'track', 'ia_residual']

SKIP_TOLERANCE = 1e-14


class NetworkBeamformers(object):
    """Transmit beamformers of the whole network.

    Parameters
    ----------
    outer : list of ndarray (M, m_b)
        Outer beamformer of every cell.
    directions : list of list of ndarray (m_b, d)
        Unit-norm inner directions, directions[b][k].
    powers : ndarray (B, K)
        Per-user transmit power in watts.

    """

    def __init__(self, outer, directions, powers):
        self.outer = outer
        self.directions = directions
        self.powers = np.asarray(powers, dtype=float)

    @property
    def d(self):
        return self.directions[0][0].shape[1]

    def precoders(self):
        """Effective precoders F_b V_kb with V_kb = sqrt(P_kb/d) Vtilde_kb, shape (B, K, M, d)."""
        B, K = self.powers.shape
        return np.array([[np.sqrt(self.powers[b, k] / self.d) * self.outer[b] @ self.directions[b][k]
                          for k in range(K)] for b in range(B)])


class TrainingSample(object):
    """Received training vector x of length N at instant t."""

    def __init__(self, x, t=0):
        self.x = x
        self.t = t


class FDPMState(object):
    """Receive filter being tracked.

    Attributes
    ----------
    U : ndarray (N, d)
        Orthonormal columns.
    alpha0 : float
        Base step, negative for minor-subspace tracking.
    samples_seen : int
    trace : list of float
        Energy ||U^H x||**2 of each processed sample.

    """

    def __init__(self, U, alpha0=-0.1, samples_seen=0, trace=None):
        self.U = U
        self.alpha0 = alpha0
        self.samples_seen = samples_seen
        self.trace = [] if trace is None else trace

    def __repr__(self):
        return '<FDPMState N={} d={} samples_seen={}>'.format(self.U.shape[0], self.U.shape[1],
                                                               self.samples_seen)


def _sources(b, k, channels, beamformers, mode):
    """Effective (N, d) channels of every transmitted stream seen by user k of cell b."""
    H = channels.true
    precoders = beamformers.precoders()
    B, K = beamformers.powers.shape
    sources = []
    for bp in range(B):
        for i in range(K):
            if bp == b and i == k and mode != 'full':
                continue
            sources.append(H[b, k, bp] @ precoders[bp, i])
    if mode not in ('full', 'interference_only'):
        raise ValueError('unknown training mode {}'.format(mode))
    N = H.shape[3]
    if not sources:
        return np.zeros((N, 0), dtype=complex)
    return np.concatenate(sources, axis=1)


def training_samples(b, k, channels, beamformers, delta2, rng, count, mode='interference_only'):
    """Draw `count` received training vectors of user k in cell b.

    Every source stream carries unit-variance symbols; its power is folded
    into the precoder. Returns an array of shape (N, count).
    """
    effective = _sources(b, k, channels, beamformers, mode)
    N = effective.shape[0]
    symbols = complex_normal(rng, (effective.shape[1], count))
    noise = complex_normal(rng, (N, count), delta2)
    return effective @ symbols + noise


def training_sample(b, k, channels, beamformers, delta2, rng, mode='interference_only', t=0):
    """Draw a single training vector."""
    return TrainingSample(training_samples(b, k, channels, beamformers, delta2, rng, 1, mode)[:, 0], t)


def received_covariance(b, k, channels, beamformers, delta2, mode='interference_only'):
    """Analytic covariance sum P/d (H F Vt)(H F Vt)^H + delta2 I of the training signal."""
    effective = _sources(b, k, channels, beamformers, mode)
    N = effective.shape[0]
    return effective @ effective.conj().T + delta2 * np.eye(N)


def householder(x_bar):
    """Complex Householder reflector H with H x_bar = exp(j theta) ||x_bar|| e_1.

    theta is the phase of the first entry of x_bar.
    """
    x_bar = np.asarray(x_bar, dtype=complex)
    d = x_bar.shape[0]
    norm = np.linalg.norm(x_bar)
    if norm == 0:
        return np.eye(d, dtype=complex)
    e1 = np.zeros(d, dtype=complex)
    e1[0] = 1.
    a = x_bar - np.exp(1j * np.angle(x_bar[0])) * norm * e1
    a_norm = np.linalg.norm(a)
    if a_norm < 1e-14 * norm:
        return np.eye(d, dtype=complex)
    return np.eye(d) - (2. / a_norm ** 2) * np.outer(a, a.conj())


def step_size(x, alpha0, step_norm='x2', index=0, decay=0.):
    """Per-sample step alpha0/||x||**2 ('x2') or alpha0/||x|| ('x1').

    With ``decay > 0`` the base step of sample `index` (zero-based) is
    alpha0 decay/(decay + index).
    """
    if decay < 0:
        raise ValueError('step decay must be non-negative')
    norm = np.linalg.norm(x)
    if norm == 0:
        return 0.
    if decay > 0:
        alpha0 = alpha0 * decay / (decay + index)
    if step_norm == 'x2':
        return alpha0 / norm ** 2
    elif step_norm == 'x1':
        return alpha0 / norm
    raise ValueError('unknown step normalization {}'.format(step_norm))


def dpm_step(U, x, alpha):
    """Data projection step U' = orthonormalize(U + alpha x x_bar^H), x_bar = U^H x."""
    x_bar = U.conj().T @ x
    return orthonormalize(U + alpha * np.outer(x, x_bar.conj()))


def householder_step(U, x, alpha):
    """DPM step with the Gram-Schmidt replaced by a Householder rotation.

    T = U + alpha x x_bar^H is multiplied by the reflector of x_bar; the
    columns of T H are mutually orthogonal and only need normalizing.
    """
    x_bar = U.conj().T @ x
    if np.linalg.norm(x_bar) <= SKIP_TOLERANCE:
        return U
    T = U + alpha * np.outer(x, x_bar.conj())
    TH = T @ householder(x_bar)
    return TH / np.linalg.norm(TH, axis=0)


def fdpm_step(state, x, alpha):
    """One FDPM update, O(N d).

    With u = x_bar/||x_bar|| the direction of the sample inside the tracked
    space, the column U u is replaced by the normalized (U + alpha x
    x_bar^H) u and every direction orthogonal to u is left unchanged.
    """
    U = state.U
    x_bar = U.conj().T @ x
    x_bar_norm = np.linalg.norm(x_bar)
    state.samples_seen += 1
    state.trace.append(x_bar_norm ** 2)
    if x_bar_norm <= SKIP_TOLERANCE:
        return state
    z = U @ x_bar
    B = z / x_bar_norm + alpha * x_bar_norm * x
    C = B / np.linalg.norm(B) - z / x_bar_norm
    state.U = U + np.outer(C, x_bar.conj()) / x_bar_norm
    return state


def track(U0, samples, alpha0=-0.1, L=None, step_norm='x2', decay=0.):
    """Run FDPM over a stream of samples.

    Parameters
    ----------
    U0 : ndarray (N, d)
        Orthonormal starting filter.
    samples : iterable of ndarray (N,)
        E.g. the columns of the array returned by `training_samples`,
        iterated as ``X.T``.
    alpha0 : float
        Negative base step.
    L : int, optional
        Maximum number of samples to use.
    step_norm : str
    decay : float
        Step decay constant, see `step_size`; 0 keeps the step constant.

    Returns
    -------
    FDPMState

    """
    if alpha0 >= 0:
        raise ValueError('minor-subspace tracking needs alpha0 < 0')
    state = FDPMState(np.array(U0, dtype=complex), alpha0)
    for index, x in enumerate(samples):
        if L is not None and index >= L:
            break
        fdpm_step(state, x, step_size(x, alpha0, step_norm, index, decay))
    return state


def ia_residual(receivers, channels, beamformers):
    """Interference left after receive filtering, per user.

    Parameters
    ----------
    receivers : ndarray (B, K, N, d)
    channels : ChannelSet
    beamformers : NetworkBeamformers

    Returns
    -------
    residual : ndarray (B, K)
        sum over interfering streams of ||U^H H F V||_F**2 on the true channels.
    full_rank : ndarray (B, K) of bool
        rank(U^H H F V_k) == d for the desired stream.

    """
    H = channels.true
    precoders = beamformers.precoders()
    B, K = beamformers.powers.shape
    d = beamformers.d
    residual = np.zeros((B, K))
    full_rank = np.zeros((B, K), dtype=bool)
    for b in range(B):
        for k in range(K):
            U = receivers[b][k]
            # filtered[bp, i] = U^H H[b, k, bp] F_bp V_i,bp
            filtered = np.einsum('nd,pnm,pimc->pidc', U.conj(), H[b, k], precoders)
            energy = np.sum(np.abs(filtered) ** 2, axis=(2, 3))
            residual[b, k] = energy.sum() - energy[b, k]
            desired = U.conj().T @ H[b, k, b] @ beamformers.outer[b] @ beamformers.directions[b][k]
            full_rank[b, k] = np.linalg.matrix_rank(desired) == d
    return residual, full_rank
