"""Helper functions for Monte Carlo statistics over simulation drops

Use
---

    from robustia.statistics_helpers import mean_and_standard_error
    mean, sem = mean_and_standard_error(ee_per_drop)

"""

import numpy as np
from scipy import stats

__all__ = ['sigma_to_fraction', 'mean_and_standard_error', 'binomial_fraction_uncertainty',
           'paired_difference']


def sigma_to_fraction(sigma):
    """Two-sided probability mass within +-sigma of a normal distribution, e.g. 1 sigma ~= 68 %."""
    return 1. - stats.norm.cdf(-1. * sigma) * 2


def mean_and_standard_error(values):
    """Mean and standard error of the mean of finite values.

    :param values: array_like
    :return: (mean, sem); sem is NaN for fewer than two values, both NaN
        for no values
    """
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if values.size == 0:
        return np.nan, np.nan
    if values.size == 1:
        return float(values[0]), np.nan
    return float(np.mean(values)), float(stats.sem(values))


def binomial_fraction_uncertainty(n_events, n_reference, sigma=1.):
    """Fraction k/n with its lower and upper uncertainty.

    Bayesian interval with a uniform prior, i.e. quantiles of
    Beta(k+1, n-k+1) enclosing the probability of a `sigma` normal interval.

    :param n_events: int
    :param n_reference: int
    :param sigma: float
    :return: ndarray [fraction, fraction - lower, upper - fraction]
    """
    c = sigma_to_fraction(sigma)
    k = n_events
    n = n_reference
    if n == 0:
        return np.zeros(3)
    p_lower = stats.beta.ppf((1 - c) / 2., k + 1, n - k + 1)
    p_upper = stats.beta.ppf(1 - (1 - c) / 2., k + 1, n - k + 1)
    frac = k / float(n)
    return np.array([frac, frac - p_lower, p_upper - frac])


def paired_difference(first, second):
    """Mean and standard error of first - second over paired samples."""
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    return mean_and_standard_error(first - second)
