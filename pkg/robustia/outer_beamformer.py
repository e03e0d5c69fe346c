"""Outer (cell-level) beamformer on the Grassmann manifold.

The outer beamformer F_b (M x m_b, orthonormal columns) spans the subspace
in which cell b leaks the least inter-cell interference. It minimizes the
Rayleigh quotient J(F) = Tr(F^H Phi_b F) with a conjugate-gradient method
along geodesics of the Grassmann manifold (Edelman, Arias & Smith 1998)
and is only re-optimized when Phi_b has moved enough (set-membership gate).

Use
---

    from robustia.outer_beamformer import interference_covariance, SMGateState, sm_update
    others = [bp for bp in range(channels.B) if bp != b]
    Phi = interference_covariance(channels.estimate[others, :, b], delta_e)
    gate = SMGateState(eta=0.05)
    F, updated = sm_update(Phi, gate, F0=F_init)

"""

import warnings

import numpy as np
from astropy import log

from .exceptions import LineSearchWarning, NoConvergenceWarning
from .linalg_helpers import compact_svd, orthonormalize

__all__ = ['interference_covariance', 'rayleigh_quotient', 'horizontal_gradient', 'geodesic',
           'armijo_tau', 'transport', 'conjugate_direction', 'CGGMOptions', 'GrassmannState',
           'cggm', 'SMGateState', 'sm_update']

MAX_HALVINGS = 60
MAX_EXPANSIONS = 30


def interference_covariance(H_hat_other, delta_e, coefficient='term_count'):
    """Inter-cell interference covariance Phi_b of one base station.

    Parameters
    ----------
    H_hat_other : ndarray (B-1, K, N, M) or (L, N, M)
        Estimated channels from BS b to every user of the other cells.
    delta_e : float
    coefficient : str
        'term_count' adds (B-1) K delta_e**2 I, one per channel in the sum;
        'printed' adds (B K - 1) delta_e**2 I.

    Returns
    -------
    Phi : ndarray (M, M)

    """
    H = np.asarray(H_hat_other)
    M = H.shape[-1]
    H = H.reshape((-1,) + H.shape[-2:])
    Phi = np.einsum('lnm,lnp->mp', H.conj(), H)
    if coefficient == 'term_count':
        count = H.shape[0]
    elif coefficient == 'printed':
        K = np.asarray(H_hat_other).shape[-3]
        count = H.shape[0] + K - 1 if H.shape[0] else 0
    else:
        raise ValueError('unknown error coefficient {}'.format(coefficient))
    return Phi + count * delta_e ** 2 * np.eye(M)


def rayleigh_quotient(F, Phi):
    """J = Re Tr(F^H Phi F)."""
    return float(np.real(np.trace(F.conj().T @ Phi @ F)))


def euclidean_gradient(F, Phi):
    return 2. * Phi @ F


def horizontal_gradient(F, Phi):
    """Xi = (I - F F^H) 2 Phi F, the gradient projected onto the tangent space."""
    gradient = euclidean_gradient(F, Phi)
    return gradient - F @ (F.conj().T @ gradient)


def geodesic(F, svd, tau):
    """Point at arc length tau along the geodesic from F in direction Lambda Sigma R^H."""
    left, singulars, right = svd
    cos = np.cos(singulars * tau)
    sin = np.sin(singulars * tau)
    return (F @ right) * cos @ right.conj().T + left * sin @ right.conj().T


def transport(F, svd, Xi, tau):
    """Parallel transport of the search direction and of Xi to F(tau).

    Returns
    -------
    Theta_translated, Xi_translated : ndarray (M, m)

    """
    left, singulars, right = svd
    cos = np.cos(singulars * tau)
    sin = np.sin(singulars * tau)
    FR = F @ right
    Theta_translated = (-FR * sin + left * cos) * singulars @ right.conj().T
    Xi_translated = Xi - (FR * sin + left * (1. - cos)) @ (left.conj().T @ Xi)
    return Theta_translated, Xi_translated


def _inner(X, Y):
    """Re Tr(X^H Y)."""
    return float(np.real(np.vdot(X, Y)))


def conjugate_direction(Xi_new, Xi_translated, Theta_translated, Xi_old):
    """Polak-Ribiere search direction for minimization.

    Theta_new = -Xi_new + w Theta_translated with
    w = Re Tr((Xi_new - Xi_translated)^H Xi_new) / Re Tr(Xi_old^H Xi_old).
    Falls back to steepest descent (w = 0) when the result is not a descent
    direction.

    Returns
    -------
    Theta_new : ndarray
    w : float

    """
    norm_old = _inner(Xi_old, Xi_old)
    if norm_old <= 0:
        return -Xi_new, 0.
    w = _inner(Xi_new - Xi_translated, Xi_new) / norm_old
    Theta_new = -Xi_new + w * Theta_translated
    if _inner(Xi_new, Theta_new) >= 0:
        return -Xi_new, 0.
    return Theta_new, w


def armijo_tau(F, Theta, Phi, kappa=0.1, nu=2., tau0=1., return_direction=False):
    """Backtracking-Armijo step along the geodesic in direction Theta.

    A direction that is not a descent direction is replaced by -Xi. The
    first trial step is capped so that no principal angle exceeds pi/2.
    Without backtracking the step is expanded by nu while the Armijo
    condition keeps holding.

    Parameters
    ----------
    F : ndarray (M, m)
    Theta : ndarray (M, m)
        Horizontal search direction.
    Phi : ndarray (M, M)
    kappa : float
        Armijo constant in (0, 0.5).
    nu : float
        Step multiplier, > 1.
    tau0 : float

    Returns
    -------
    tau : float
        0 if the search failed after 60 halvings.
    Theta, svd : ndarray, CompactSVD
        Only when `return_direction` is True.

    """
    if not np.any(Theta):
        return (tau0, Theta, compact_svd(Theta)) if return_direction else tau0
    J = rayleigh_quotient(F, Phi)
    Xi = horizontal_gradient(F, Phi)
    slope = _inner(Xi, Theta)
    if slope >= 0:
        Theta = -Xi
        slope = -_inner(Xi, Xi)
    svd = compact_svd(Theta)

    def result(tau):
        return (tau, Theta, svd) if return_direction else tau

    if slope == 0 or svd.singulars.max() == 0:
        return result(tau0)

    def accepted(tau):
        return rayleigh_quotient(geodesic(F, svd, tau), Phi) <= J + kappa * tau * slope

    tau = min(tau0, 0.5 * np.pi / svd.singulars.max())
    halvings = 0
    while not accepted(tau):
        tau /= nu
        halvings += 1
        if halvings >= MAX_HALVINGS:
            warnings.warn('Armijo line search failed after {} reductions'.format(MAX_HALVINGS),
                          LineSearchWarning)
            return result(0.)
    if halvings == 0:
        limit = np.pi / svd.singulars.max()
        for expansion in range(MAX_EXPANSIONS):
            if nu * tau > limit or not accepted(nu * tau):
                break
            tau *= nu
    return result(tau)


class CGGMOptions(object):
    """Stopping rule and line-search constants of `cggm`."""

    def __init__(self, max_iter=200, tol=1e-6, grad_tol=1e-3, kappa=0.1, nu=2., tau0=1.):
        self.max_iter = max_iter
        self.tol = tol
        self.grad_tol = grad_tol
        self.kappa = kappa
        self.nu = nu
        self.tau0 = tau0

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg.cggm_max_iter, cfg.cggm_tol, cfg.cggm_grad_tol, cfg.armijo_kappa,
                   cfg.armijo_nu, cfg.armijo_tau0)


class GrassmannState(object):
    """State of the conjugate-gradient iteration.

    Attributes
    ----------
    F : ndarray (M, m)
    Theta : ndarray (M, m)
        Current search direction.
    Xi_prev : ndarray (M, m)
    tau : float
    J : float
    iterations : int
    converged : bool
    J_trace : list of float

    """

    def __init__(self, F, Theta, Xi_prev, tau, J, iterations=0, converged=False, J_trace=None):
        self.F = F
        self.Theta = Theta
        self.Xi_prev = Xi_prev
        self.tau = tau
        self.J = J
        self.iterations = iterations
        self.converged = converged
        self.J_trace = [J] if J_trace is None else J_trace

    def __repr__(self):
        return '<GrassmannState J={:.6g} iterations={} converged={}>'.format(
            self.J, self.iterations, self.converged)


def _stationary(Xi, F, Phi, grad_tol):
    gradient_norm = np.linalg.norm(euclidean_gradient(F, Phi))
    return np.linalg.norm(Xi) <= grad_tol * gradient_norm or gradient_norm == 0


def cggm(Phi, F0, opts=None):
    """Minimize Tr(F^H Phi F) over orthonormal F by Grassmann conjugate gradient.

    Stops when the relative objective change is below ``opts.tol`` and
    ||Xi||_F <= grad_tol ||2 Phi F||_F, or after ``opts.max_iter`` iterations.

    Parameters
    ----------
    Phi : ndarray (M, M)
        Hermitian.
    F0 : ndarray (M, m)
        Orthonormal starting point.
    opts : CGGMOptions, optional

    Returns
    -------
    GrassmannState

    """
    if opts is None:
        opts = CGGMOptions()
    F = np.array(F0, dtype=complex)
    J = rayleigh_quotient(F, Phi)
    Xi = horizontal_gradient(F, Phi)
    Theta = -Xi
    state = GrassmannState(F, Theta, Xi, 0., J)
    if _stationary(Xi, F, Phi, 1e-12) or not np.any(Xi):
        state.iterations = 1
        state.converged = True
        return state

    for iteration in range(1, opts.max_iter + 1):
        tau, Theta, svd = armijo_tau(F, Theta, Phi, opts.kappa, opts.nu, opts.tau0,
                                     return_direction=True)
        if tau == 0.:
            state.iterations = iteration
            log.debug('cggm stalled at iteration {}'.format(iteration))
            break
        F_new = geodesic(F, svd, tau)
        Theta_translated, Xi_translated = transport(F, svd, Xi, tau)
        F_new = orthonormalize(F_new)
        J_new = rayleigh_quotient(F_new, Phi)
        Xi_new = horizontal_gradient(F_new, Phi)
        change = abs(J_new - J) / max(abs(J), 1.)
        F, J, Xi_old, Xi = F_new, J_new, Xi, Xi_new
        state.F, state.J, state.tau = F, J, tau
        state.J_trace.append(J)
        state.iterations = iteration
        if not np.any(Xi) or (change < opts.tol and _stationary(Xi, F, Phi, opts.grad_tol)):
            state.converged = True
            state.Xi_prev = Xi
            state.Theta = -Xi
            break
        Theta, _ = conjugate_direction(Xi, Xi_translated, Theta_translated, Xi_old)
        state.Theta = Theta
        state.Xi_prev = Xi
    else:
        warnings.warn('cggm reached {} iterations (J={:.6g})'.format(opts.max_iter, J),
                      NoConvergenceWarning)
    return state


class SMGateState(object):
    """Set-membership gate of one cell.

    The outer beamformer is re-optimized only when
    ||Phi_t - Phi_prev||_F**2 >= Pi_b. Pi_b is either fixed (`threshold`) or
    eta ||Phi_prev||_F**2, recomputed at every update.

    Parameters
    ----------
    eta : float
    threshold : float, optional
        Fixed Pi_b, overriding eta.

    """

    def __init__(self, eta=0.05, threshold=None):
        if eta < 0 or (threshold is not None and threshold < 0):
            raise ValueError('gate threshold must be non-negative')
        self.eta = eta
        self.threshold = threshold
        self.Phi_prev = None
        self.F_prev = None
        self.update_count = 0
        self.hold_count = 0

    @property
    def Pi_b(self):
        if self.threshold is not None:
            return self.threshold
        if self.Phi_prev is None:
            return 0.
        return self.eta * np.linalg.norm(self.Phi_prev) ** 2

    def deviation(self, Phi_t):
        return float(np.linalg.norm(Phi_t - self.Phi_prev) ** 2)

    def __repr__(self):
        return '<SMGateState Pi_b={:.4g} updates={} holds={}>'.format(self.Pi_b, self.update_count,
                                                                      self.hold_count)


def sm_update(Phi_t, gate, opts=None, F0=None):
    """Gated outer-beamformer update.

    The first call always updates (from `F0`); later calls run `cggm`
    warm-started at the previous F only when the deviation reaches Pi_b.

    Returns
    -------
    F_t : ndarray (M, m)
    updated : bool

    """
    if gate.Phi_prev is None:
        if F0 is None:
            raise ValueError('the first gated update needs an initial F0')
        start = F0
    elif gate.deviation(Phi_t) >= gate.Pi_b:
        start = gate.F_prev
    else:
        gate.hold_count += 1
        return gate.F_prev, False
    state = cggm(Phi_t, start, opts)
    gate.Phi_prev = np.array(Phi_t)
    gate.F_prev = state.F
    gate.update_count += 1
    return state.F, True
