"""Inner (per-user) transmit beamformer under channel estimation error.

Within the subspace spanned by a cell's outer beamformer F (M x m_b), every
user gets unit-norm beamforming directions and a power such that its
expected signal-to-leakage-plus-noise ratio (SLNR) meets a target. The
expectation over the estimation error enters through effective Gram matrices
Hhat^H Hhat + delta_e**2 I.

Powers are per-user totals; user k transmits F V_k s_k with
V_k = sqrt(P_k / d) Vtilde_k.

Use
---

    from robustia.inner_beamformer import CellGrams, solve_inner
    grams = CellGrams.from_channels(channels, b, delta_e)
    solution = solve_inner(F_b, grams, gamma_bar=1., delta2=1., P_T=15.8)

"""

import warnings

import numpy as np
from astropy import log
from scipy import linalg

from .exceptions import InfeasibleSLNRError, NoConvergenceWarning, SolverFailure

__all__ = ['effective_gram', 'CellGrams', 'InnerSolution', 'leakage_matrix',
           'beamforming_directions', 'solve_slnr_powers', 'update_multipliers', 'slnr', 'lif',
           'inner_objective', 'solve_inner']


def effective_gram(H_hat, delta_e):
    """Return Hhat^H Hhat + delta_e**2 I (works on stacked channels too)."""
    H_hat = np.asarray(H_hat)
    gram = np.swapaxes(H_hat.conj(), -1, -2) @ H_hat
    return gram + delta_e ** 2 * np.eye(H_hat.shape[-1])


class CellGrams(object):
    """Effective Gram matrices seen from one base station.

    Parameters
    ----------
    user : ndarray (K, M, M)
        Gram of the channel from this BS to each of its own users.
    inter : ndarray (M, M)
        Sum of the grams from this BS toward every user of the other cells.

    """

    def __init__(self, user, inter):
        self.user = np.asarray(user)
        self.inter = np.asarray(inter)

    @property
    def K(self):
        return self.user.shape[0]

    @property
    def M(self):
        return self.user.shape[1]

    @classmethod
    def from_channels(cls, channels, b, delta_e):
        """Grams of cell b from estimated channels with error level delta_e."""
        estimate = channels.estimate
        user = effective_gram(estimate[b, :, b], delta_e)
        inter = np.zeros((channels.M, channels.M), dtype=complex)
        for bp in range(channels.B):
            if bp != b:
                inter += effective_gram(estimate[bp, :, b], delta_e).sum(axis=0)
        return cls(user, inter)

    def scaled(self, factor):
        return CellGrams(factor * self.user, factor * self.inter)


class InnerSolution(object):
    """Result of the inner beamformer of one cell.

    Attributes
    ----------
    directions : list of ndarray (m_b, d)
        Unit-norm columns.
    powers : ndarray (K,)
        Per-user transmit power in watts.
    multipliers : ndarray (K,)
    achieved_slnr : ndarray (K,)
    iterations : int
    converged : bool
    budget_limited : bool
        Powers were scaled down to meet the power budget.
    feasible : bool

    """

    def __init__(self, directions, powers, multipliers, achieved_slnr, iterations=1,
                 converged=True, budget_limited=False, feasible=True):
        self.directions = directions
        self.powers = powers
        self.multipliers = multipliers
        self.achieved_slnr = achieved_slnr
        self.iterations = iterations
        self.converged = converged
        self.budget_limited = budget_limited
        self.feasible = feasible

    def __repr__(self):
        return '<InnerSolution K={} iterations={} converged={} feasible={}>'.format(
            len(self.powers), self.iterations, self.converged, self.feasible)


def _projected(F, G):
    """F^H G F for a single or stacked gram."""
    return F.conj().T @ G @ F


def _quadratic(V, G):
    """Re Tr(V^H G V)."""
    return np.real(np.trace(V.conj().T @ G @ V))


def leakage_matrix(k, multipliers, F, grams, delta2):
    """Weighted leakage matrix A_k of user k (m_b x m_b), regularized.

    A_k = sum_{j != k} (delta2 + lambda_j)/delta2 F^H (G_j + G_inter) F + eps I
    with eps = 1e-9 (1 + Tr S) / m_b and S the unregularized sum.
    """
    m = F.shape[1]
    S = np.zeros((m, m), dtype=complex)
    projected_inter = _projected(F, grams.inter)
    for j in range(grams.K):
        if j == k:
            continue
        weight = (delta2 + multipliers[j]) / delta2
        S += weight * (_projected(F, grams.user[j]) + projected_inter)
    eps = 1e-9 * (1. + np.real(np.trace(S))) / m
    A = S + eps * np.eye(m)
    return 0.5 * (A + A.conj().T)


def beamforming_directions(multipliers, F, grams, delta2, d=1):
    """Top-d generalized eigenvectors of (F^H G_k F, A_k) for every user.

    Returns
    -------
    directions : list of ndarray (m_b, d)
        Columns normalized to unit norm.

    """
    directions = []
    for k in range(grams.K):
        A = leakage_matrix(k, multipliers, F, grams, delta2)
        M_k = _projected(F, grams.user[k])
        M_k = 0.5 * (M_k + M_k.conj().T)
        try:
            values, vectors = linalg.eigh(M_k, A)
        except (linalg.LinAlgError, ValueError) as error:
            raise SolverFailure('generalized eigenproblem failed for user {}: {}'.format(k, error))
        values = values[-d:]
        vectors = vectors[:, -d:]
        residual = np.linalg.norm(M_k @ vectors - (A @ vectors) * values)
        scale = (np.linalg.norm(M_k) + np.abs(values).max() * np.linalg.norm(A)) * np.linalg.norm(vectors)
        if not np.isfinite(residual) or residual > 1e-6 * max(scale, 1e-300):
            raise SolverFailure('generalized eigenvector residual {:.3e} for user {}'.format(residual, k))
        directions.append(vectors / np.linalg.norm(vectors, axis=0))
    return directions


def _signal_and_leakage(directions, F, grams):
    """Per-user Tr(Vt^H F^H G_k F Vt) and own-beam leakage for unit powers."""
    projected_user = [_projected(F, G) for G in grams.user]
    projected_inter = _projected(F, grams.inter)
    K = grams.K
    signal = np.zeros(K)
    iui = np.zeros(K)
    ici = np.zeros(K)
    for k, V in enumerate(directions):
        signal[k] = _quadratic(V, projected_user[k])
        iui[k] = sum(_quadratic(V, projected_user[j]) for j in range(K) if j != k)
        ici[k] = _quadratic(V, projected_inter)
    return signal, iui, ici


def solve_slnr_powers(directions, F, grams, gamma_bar, delta2, P_T, constraint='slnr'):
    """Powers meeting every user's SLNR target with equality.

    Solves the K x K system M x = delta2 1 for the per-stream powers
    x_k = P_k / d. With ``constraint='slnr'`` user k's row holds its own-beam
    signal and leakage, M_kk = s_k/gamma_k - l_k, so the system is diagonal.
    With ``constraint='sinr'`` the off-diagonal entries carry the
    interference that the beam of user j causes at user k.

    Parameters
    ----------
    directions : list of ndarray (m_b, d)
    F : ndarray (M, m_b)
    grams : CellGrams
    gamma_bar : float or ndarray (K,)
    delta2 : float
    P_T : float
        Power budget of the BS.
    constraint : str
        'slnr' or 'sinr'.

    Returns
    -------
    powers : ndarray (K,)
    budget_limited : bool

    """
    K = grams.K
    d = directions[0].shape[1]
    gamma_bar = np.broadcast_to(np.asarray(gamma_bar, dtype=float), (K,))
    signal, iui, ici = _signal_and_leakage(directions, F, grams)
    if constraint == 'slnr':
        system = np.diag(signal / gamma_bar - iui - ici)
    elif constraint == 'sinr':
        projected_user = [_projected(F, G) for G in grams.user]
        system = np.empty((K, K))
        for k in range(K):
            for j in range(K):
                if j == k:
                    system[k, k] = signal[k] / gamma_bar[k]
                else:
                    system[k, j] = -_quadratic(directions[j], projected_user[k])
    else:
        raise ValueError('unknown power constraint {}'.format(constraint))

    try:
        per_stream = np.linalg.solve(system, delta2 * np.ones(K))
    except np.linalg.LinAlgError:
        raise InfeasibleSLNRError('singular SLNR power system')
    if not np.all(np.isfinite(per_stream)) or np.any(per_stream <= 0):
        raise InfeasibleSLNRError('SLNR targets {} not reachable with positive powers'.format(gamma_bar))

    powers = d * per_stream
    total = powers.sum()
    budget_limited = total > P_T
    if budget_limited:
        powers = powers * (P_T / total)
    return powers, budget_limited


def update_multipliers(multipliers, achieved, gamma_bar, tol=1e-4):
    """Damped multiplicative update lambda_k * clip(gamma_k / achieved_k, 1/2, 2).

    Returns
    -------
    multipliers : ndarray
    converged : bool
        All achieved SLNRs within `tol` relative of their targets.

    """
    multipliers = np.asarray(multipliers, dtype=float)
    achieved = np.asarray(achieved, dtype=float)
    gamma_bar = np.broadcast_to(np.asarray(gamma_bar, dtype=float), achieved.shape)
    converged = bool(np.all(np.abs(achieved - gamma_bar) < tol * gamma_bar))
    with np.errstate(divide='ignore'):
        ratio = np.where(achieved > 0, gamma_bar / np.where(achieved > 0, achieved, 1.), np.inf)
    return multipliers * np.clip(ratio, 0.5, 2.), converged


def slnr(k, directions, powers, F, grams, delta2):
    """Expected SLNR of user k."""
    d = directions[k].shape[1]
    V = np.sqrt(powers[k] / d) * directions[k]
    signal = _quadratic(V, _projected(F, grams.user[k]))
    iui, ici = lif(k, directions, powers, F, grams)
    return signal / (iui + ici + delta2)


def lif(k, directions, powers, F, grams):
    """Leakage of user k's beam split into intra-cell (iui) and inter-cell (ici) parts."""
    d = directions[k].shape[1]
    V = np.sqrt(powers[k] / d) * directions[k]
    FV = F @ V
    iui = sum(_quadratic(FV, grams.user[j]) for j in range(grams.K) if j != k)
    ici = _quadratic(FV, grams.inter)
    return float(iui), float(ici)


def inner_objective(directions, powers, F, grams):
    """Total intra-cell leakage sum_k sum_{j != k} Tr(G_j F V_k V_k^H F^H)."""
    K = grams.K
    d = directions[0].shape[1]
    V = np.stack([np.sqrt(powers[k] / d) * directions[k] for k in range(K)])
    FV = np.einsum('mn,knd->kmd', F, V)
    # quad[j, k] = Tr((F V_k)^H G_j (F V_k))
    quad = np.real(np.einsum('kmd,jmn,knd->jk', FV.conj(), grams.user, FV))
    return float(quad.sum() - np.trace(quad))


def solve_inner(F, grams, gamma_bar, delta2, P_T, d=1, constraint='slnr', tol=1e-4,
                max_sweeps=100):
    """Solve the inner beamformer of one cell.

    Alternates directions, SLNR-equality powers and the multiplier update
    until every achieved SLNR is within `tol` of its target. When the
    powers had to be scaled to the budget the targets cannot be met and
    the current iterate is returned with ``budget_limited=True``.

    Raises
    ------
    InfeasibleSLNRError
        No positive power vector meets the targets.

    """
    K = grams.K
    multipliers = delta2 * np.ones(K)
    best = None
    best_gap = np.inf
    for sweep in range(1, max_sweeps + 1):
        directions = beamforming_directions(multipliers, F, grams, delta2, d)
        try:
            powers, budget_limited = solve_slnr_powers(directions, F, grams, gamma_bar, delta2,
                                                       P_T, constraint)
        except InfeasibleSLNRError:
            if best is None:
                raise
            log.debug('inner solve became infeasible at sweep {}, keeping best iterate'.format(sweep))
            best.converged = False
            return best
        achieved = np.array([slnr(k, directions, powers, F, grams, delta2) for k in range(K)])
        new_multipliers, converged = update_multipliers(multipliers, achieved, gamma_bar, tol)
        gap = np.max(np.abs(achieved / gamma_bar - 1.))
        if gap < best_gap:
            best_gap = gap
            best = InnerSolution(directions, powers, multipliers.copy(), achieved, sweep,
                                 converged, budget_limited)
        if converged:
            break
        if budget_limited:
            log.debug('SLNR targets exceed the power budget, achieved {}'.format(achieved))
            best = InnerSolution(directions, powers, multipliers.copy(), achieved, sweep, False,
                                 budget_limited)
            break
        multipliers = new_multipliers
    else:
        warnings.warn('multiplier iteration did not converge in {} sweeps (gap {:.2e})'.format(
            max_sweeps, best_gap), NoConvergenceWarning)
    best.iterations = sweep
    return best
