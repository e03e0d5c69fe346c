#!/usr/bin/env python
"""Tests for the statistics_helpers module."""

import numpy as np

from ..statistics_helpers import (binomial_fraction_uncertainty, mean_and_standard_error,
                                  paired_difference, sigma_to_fraction)


def test_sigma_fraction():
    assert np.isclose(sigma_to_fraction(1.), 0.6826894921370859)
    assert np.isclose(sigma_to_fraction(2.), 0.9544997361036416)
    assert sigma_to_fraction(0.) == 0.


def test_mean_and_standard_error():
    mean, sem = mean_and_standard_error([1., 2., 3., np.nan, np.inf])
    assert mean == 2.
    assert np.isclose(sem, 1. / np.sqrt(3.))

    mean, sem = mean_and_standard_error([5.])
    assert mean == 5. and np.isnan(sem)

    mean, sem = mean_and_standard_error([])
    assert np.isnan(mean) and np.isnan(sem)


def test_binomial_fraction_uncertainty():
    assert np.array_equal(binomial_fraction_uncertainty(0, 0), np.zeros(3))
    fraction, lower, upper = binomial_fraction_uncertainty(50, 100)
    assert fraction == 0.5
    assert np.isclose(lower, upper, rtol=1e-6)
    assert 0.04 < lower < 0.06

    wide = binomial_fraction_uncertainty(50, 100, sigma=2.)
    assert wide[1] > lower

    fraction, lower, _ = binomial_fraction_uncertainty(10, 10)
    assert fraction == 1. and lower > 0


def test_paired_difference():
    mean, sem = paired_difference([2., 3., 4.], [1., 1., 1.])
    assert mean == 2. and np.isclose(sem, 1. / np.sqrt(3.))
