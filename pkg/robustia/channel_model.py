"""Time-varying multi-cell MIMO channels with estimation error.

Channels are stored as arrays of shape (B, K, B, N, M): entry [b, k, bp] is
the N x M channel from base station bp to user k of cell b.

Use
---

    import numpy as np
    from robustia.channel_model import draw_channels, doppler_alpha, evolve
    rng = np.random.default_rng(cfg.seed)
    channels = draw_channels(cfg, rng)
    alpha = doppler_alpha(cfg.v, cfg.f_c, cfg.Omega)
    channels = evolve(channels, alpha, rng)

"""

import numpy as np
from astropy import constants as const
import astropy.units as u

from .exceptions import DimensionError
from .linalg_helpers import bessel_j0, complex_normal

__all__ = ['ChannelSet', 'doppler_alpha', 'draw_channels', 'error_variance', 'evolve', 'split_estimate']

SPEED_OF_LIGHT = const.c.to_value(u.m / u.s)


class ChannelSet(object):
    """True, estimated and error channels of the whole network at one instant.

    Parameters
    ----------
    true, estimate, error : ndarray (B, K, B, N, M), complex
        ``true = estimate + error``.
    delta_e : float
        Error standard deviation used for the split.
    error_normalization : str
        'gram_identity' or 'per_entry'.

    """

    def __init__(self, true, estimate, error, delta_e, error_normalization='gram_identity'):
        if not (true.shape == estimate.shape == error.shape) or true.ndim != 5:
            raise DimensionError('channel arrays must share a (B, K, B, N, M) shape')
        self.true = true
        self.estimate = estimate
        self.error = error
        self.delta_e = delta_e
        self.error_normalization = error_normalization

    @property
    def shape(self):
        return self.true.shape

    @property
    def B(self):
        return self.true.shape[0]

    @property
    def K(self):
        return self.true.shape[1]

    @property
    def N(self):
        return self.true.shape[3]

    @property
    def M(self):
        return self.true.shape[4]

    def link(self, b, k, bp, kind='true'):
        """Channel from BS bp to user k of cell b."""
        return getattr(self, kind)[b, k, bp]

    def __repr__(self):
        return '<ChannelSet B={} K={} N={} M={} delta_e={}>'.format(self.B, self.K, self.N, self.M,
                                                                   self.delta_e)


def doppler_alpha(v, f_c, Omega):
    """Gauss-Markov correlation coefficient J0(2 pi Omega f_d).

    Parameters
    ----------
    v : float
        User speed in m/s.
    f_c : float
        Carrier frequency in Hz.
    Omega : float
        Symbol period in s.

    Returns
    -------
    alpha : float

    """
    if min(v, f_c, Omega) < 0:
        raise ValueError('speed, carrier frequency and symbol period must be non-negative')
    f_d = v * f_c / SPEED_OF_LIGHT
    return float(bessel_j0(2. * np.pi * Omega * f_d))


def error_variance(delta_e, N, error_normalization='gram_identity'):
    """Variance of one entry of the N x M estimation error."""
    if error_normalization == 'gram_identity':
        return delta_e ** 2 / N
    elif error_normalization == 'per_entry':
        return delta_e ** 2
    raise ValueError('unknown error normalization {}'.format(error_normalization))


def split_estimate(H_true, delta_e, rng, error_normalization='gram_identity'):
    """Split true channels into estimate and estimation error.

    The error is drawn independently of the truth; with the default
    'gram_identity' normalization its entries are CN(0, delta_e**2/N) so that
    E{dH^H dH} = delta_e**2 I. 'per_entry' uses CN(0, delta_e**2).

    Returns
    -------
    H_hat, Delta_H : ndarray
        Same shape as H_true, with H_hat = H_true - Delta_H.

    """
    if delta_e < 0:
        raise ValueError('delta_e must be non-negative')
    H_true = np.asarray(H_true)
    N = H_true.shape[-2]
    Delta_H = complex_normal(rng, H_true.shape, error_variance(delta_e, N, error_normalization))
    H_hat = H_true - Delta_H
    # recompute so that H_hat + Delta_H reproduces H_true to the last bit where representable
    Delta_H = H_true - H_hat
    return H_hat, Delta_H


def draw_channels(cfg, rng):
    """Draw i.i.d. CN(0, 1) channels for every (cell, user, source BS) triple."""
    shape = (cfg.B, cfg.K, cfg.B, cfg.N, cfg.M)
    H_true = complex_normal(rng, shape)
    H_hat, Delta_H = split_estimate(H_true, cfg.delta_e, rng, cfg.error_normalization)
    return ChannelSet(H_true, H_hat, Delta_H, cfg.delta_e, cfg.error_normalization)


def evolve(channels, alpha, rng):
    """One Gauss-Markov step H(t) = alpha H(t-1) + sqrt(1 - alpha**2) G(t).

    The estimate split is re-applied to the new truth.
    """
    if abs(alpha) > 1:
        raise ValueError('|alpha| must not exceed 1, got {}'.format(alpha))
    innovation = complex_normal(rng, channels.shape)
    H_true = alpha * channels.true + np.sqrt(1. - alpha ** 2) * innovation
    H_hat, Delta_H = split_estimate(H_true, channels.delta_e, rng, channels.error_normalization)
    return ChannelSet(H_true, H_hat, Delta_H, channels.delta_e, channels.error_normalization)
