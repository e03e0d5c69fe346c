"""Energy-efficient power allocation of one cell.

The energy efficiency of cell b is Q = R_b / P_total with R_b the sum of the
users' achievable rates (bits/s/Hz) and P_total = rho sum_k P_k + M P_c + P_o
(W). Q is maximized by Dinkelbach's method: repeatedly maximize
R - Q P_total for fixed Q and update Q to the achieved ratio.

Use
---

    from robustia.ee_power import PowerModel, RateContext, energy_efficient_powers
    context = RateContext.from_network(b, channels, outer, directions, powers, delta2,
                                       kind='estimate', delta_e=0.05)
    result = energy_efficient_powers(floors, context, PowerModel(0.39, 1., 10., 8), P_T)
    print(result.Q, result.powers)

"""

import warnings

import numpy as np
from astropy import log
from scipy.optimize import minimize_scalar

from .channel_model import error_variance
from .exceptions import NoConvergenceWarning, SingularCovarianceError

__all__ = ['PowerModel', 'EEResult', 'RateContext', 'cell_rate', 'cell_power',
           'dinkelbach_subproblem', 'energy_efficient_powers']

LOG2 = np.log(2.)


class PowerModel(object):
    """Consumed power rho sum p + M P_c + P_o of one base station."""

    def __init__(self, rho, P_c, P_o, M):
        if min(rho, P_c, P_o, M) < 0:
            raise ValueError('power model parameters must be non-negative')
        self.rho = rho
        self.P_c = P_c
        self.P_o = P_o
        self.M = M

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg.rho, cfg.P_c, cfg.P_o, cfg.M)

    @property
    def static(self):
        return self.M * self.P_c + self.P_o

    def __repr__(self):
        return '<PowerModel rho={} P_c={} P_o={} M={}>'.format(self.rho, self.P_c, self.P_o, self.M)


def cell_power(powers, model):
    """Total consumed power of a cell in watts."""
    return model.rho * np.sum(powers) + model.static


class RateContext(object):
    """Everything needed to evaluate one cell's rate as a function of its powers.

    Parameters
    ----------
    cross : ndarray (K, K, N, d)
        cross[k, j] is the effective channel H[b, k, b] F_b Vtilde_j of
        user j's unit-power beam at user k.
    external : ndarray (K, N, N)
        Interference covariance at each user from the other cells, frozen.
    delta2 : float
        Noise power.
    error : float, optional
        Variance of one entry of the channel estimation error. Each beam of
        the cell then adds error * beam_gains[j] P_j / d to the
        interference-plus-noise of every user, its own beam included.
    beam_gains : ndarray (K,), optional
        ||F Vtilde_j||_F^2 of every beam; d for orthonormal F and unit columns.

    """

    def __init__(self, cross, external, delta2, error=0., beam_gains=None):
        self.cross = np.asarray(cross)
        self.external = np.asarray(external)
        self.delta2 = delta2
        self.error = error
        K, _, N, d = self.cross.shape
        self.K = K
        self.N = N
        self.d = d
        # outer[k, j] = cross[k, j] cross[k, j]^H
        self.outer = np.einsum('kjnd,kjmd->kjnm', self.cross, self.cross.conj())
        self._base = delta2 * np.eye(N) + self.external
        self.beam_gains = d * np.ones(K) if beam_gains is None else np.asarray(beam_gains, dtype=float)

    @classmethod
    def from_network(cls, b, channels, outer_beamformers, directions, powers, delta2, kind='true',
                     delta_e=0.):
        """Build the context of cell b.

        Parameters
        ----------
        b : int
        channels : ChannelSet
        outer_beamformers : list of ndarray (M, m_b)
        directions : list of list of ndarray (m_b, d)
            directions[b][k] for every cell.
        powers : ndarray (B, K)
            Current powers; the row of cell b is ignored.
        delta2 : float
        kind : str
            'true' evaluates the realized rates; 'estimate' builds the
            transmitter's model from the estimated channels.
        delta_e : float
            Error level folded into the model as its expected interference,
            E{dH X dH^H} = sigma_e**2 Tr(X) I. Zero on the true channels.

        """
        H = getattr(channels, kind)
        B, K = H.shape[:2]
        N = H.shape[3]
        d = directions[b][0].shape[1]
        error = error_variance(delta_e, N, channels.error_normalization)
        beams = np.stack([outer_beamformers[b] @ V for V in directions[b]])  # (K, M, d)
        cross = np.einsum('knm,jmd->kjnd', H[b, :, b], beams)
        external = np.zeros((K, N, N), dtype=complex)
        for bp in range(B):
            if bp == b:
                continue
            other = np.stack([np.sqrt(powers[bp][i] / d) * outer_beamformers[bp] @ directions[bp][i]
                              for i in range(K)])
            received = np.einsum('knm,imd->kind', H[b, :, bp], other)
            external += np.einsum('kind,kimd->knm', received, received.conj())
            external += error * np.sum(np.abs(other) ** 2) * np.eye(N)
        return cls(cross, external, delta2, error, np.sum(np.abs(beams) ** 2, axis=(1, 2)))

    def user_rates(self, powers):
        """Per-user rate log2 det(I + S_k J_k^{-1}) in bits/s/Hz."""
        weights = np.asarray(powers, dtype=float) / self.d
        total = self._base + np.einsum('j,kjnm->knm', weights, self.outer)
        if self.error:
            total = total + self.error * np.dot(weights, self.beam_gains) * np.eye(self.N)
        own = weights[:, None, None] * self.outer[np.arange(self.K), np.arange(self.K)]
        interference = total - own
        sign_total, logdet_total = np.linalg.slogdet(total)
        sign_int, logdet_int = np.linalg.slogdet(interference)
        if np.any(np.real(sign_int) <= 0) or np.any(np.real(sign_total) <= 0):
            raise SingularCovarianceError('interference-plus-noise covariance is not positive definite')
        return (logdet_total - logdet_int) / LOG2

    def rate(self, powers):
        return float(np.sum(self.user_rates(powers)))


def cell_rate(b, powers, outer_beamformers, directions, channels, delta2, other_powers=None):
    """Sum rate of cell b on the true channels.

    Parameters
    ----------
    powers : ndarray (K,)
        Powers of cell b.
    other_powers : ndarray (B, K), optional
        Powers of all cells; defaults to `powers` in every cell.

    """
    B = channels.B
    if other_powers is None:
        all_powers = np.tile(powers, (B, 1))
    else:
        all_powers = np.array(other_powers, dtype=float)
        all_powers[b] = powers
    context = RateContext.from_network(b, channels, outer_beamformers, directions, all_powers, delta2)
    return context.rate(powers)


class EEResult(object):
    """Outcome of the Dinkelbach iteration.

    Attributes
    ----------
    powers : ndarray (K,)
    Q : float
        Energy efficiency in bits/s/Hz/W.
    iterations : int
    trace : list of (Q_l, residual_l)
    converged : bool

    """

    def __init__(self, powers, Q, iterations, trace, converged):
        self.powers = powers
        self.Q = Q
        self.iterations = iterations
        self.trace = trace
        self.converged = converged

    @property
    def q_trace(self):
        return np.array([row[0] for row in self.trace] + [self.Q])

    def __repr__(self):
        return '<EEResult Q={:.6g} iterations={} converged={}>'.format(self.Q, self.iterations,
                                                                       self.converged)


def _objective(context, model, Q, powers):
    return context.rate(powers) - Q * cell_power(powers, model)


def dinkelbach_subproblem(Q, floors, budget, context, model, powers=None, tol=1e-6, max_sweeps=50,
                          xatol=1e-10):
    """Approximately maximize R(p) - Q P_total(p) over floors <= p, sum p <= budget.

    Cyclic coordinate ascent: each user's power is searched on
    [floor_k, budget - sum_{j != k} p_j] by a bounded golden-section/Brent
    search with the other powers fixed. A move is accepted only if it does
    not lower the objective, so the objective is nondecreasing across sweeps.

    Parameters
    ----------
    Q : float
    floors : ndarray (K,)
    budget : float
    context : RateContext
    model : PowerModel
    powers : ndarray (K,), optional
        Feasible starting point; defaults to the floors.

    Returns
    -------
    powers : ndarray (K,)

    """
    floors = np.asarray(floors, dtype=float)
    p = floors.copy() if powers is None else np.array(powers, dtype=float)
    current = _objective(context, model, Q, p)
    for sweep in range(max_sweeps):
        start = current
        for k in range(len(p)):
            lower = floors[k]
            upper = max(lower, budget - (p.sum() - p[k]))
            if upper - lower <= 1e-15 * max(1., budget):
                continue

            def negative(value, k=k):
                trial = p.copy()
                trial[k] = value
                return -_objective(context, model, Q, trial)

            search = minimize_scalar(negative, bounds=(lower, upper), method='bounded',
                                     options={'xatol': xatol * max(1., upper)})
            candidates = [search.x, lower, upper]
            values = [search.fun, negative(lower), negative(upper)]
            best = int(np.argmin(values))
            if -values[best] >= current:
                p[k] = candidates[best]
                current = -values[best]
        if current - start < tol:
            break
    return p


def energy_efficient_powers(floors, context, model, budget, zeta=1e-2, L=20, tol=1e-6):
    """Dinkelbach iteration for the energy-efficient powers of one cell.

    Starts from the floors with Q_0 = R(floors)/P_total(floors). Iteration l
    solves the subproblem at Q_{l-1} warm-started at the previous powers and
    stops once R - Q_{l-1} P_total <= zeta.

    Returns
    -------
    EEResult

    """
    p = np.array(floors, dtype=float)
    Q = context.rate(p) / cell_power(p, model)
    trace = []
    converged = False
    for iteration in range(1, L + 1):
        p = dinkelbach_subproblem(Q, floors, budget, context, model, powers=p, tol=tol)
        rate = context.rate(p)
        consumed = cell_power(p, model)
        residual = rate - Q * consumed
        trace.append((Q, residual))
        log.debug('Dinkelbach iteration {}: Q={:.6g} residual={:.3e}'.format(iteration, Q, residual))
        Q = rate / consumed
        if residual <= zeta:
            converged = True
            break
    if not converged:
        warnings.warn('Dinkelbach iteration reached L={} (residual {:.3e})'.format(L, residual),
                      NoConvergenceWarning)
    return EEResult(p, Q, iteration, trace, converged)
