#!/usr/bin/env python
"""Tests for the plotting_helpers module."""

import os

import matplotlib
matplotlib.use('Agg')

import numpy as np
from astropy.table import Table

from ..plotting_helpers import plot_convergence, plot_sweep


def test_plot_sweep(tmpdir):
    t = Table([[30., 40.], [5., 6.], [0.1, np.nan], [0.2, 0.25], [0.01, 0.02]],
              names=('transmit_power_dbm', 'rate_mean', 'rate_sem', 'ee_mean', 'ee_sem'))
    path = os.path.join(str(tmpdir), 'figures', 'sweep.png')
    plot_sweep(t, 'transmit_power_dbm', path)
    assert os.path.isfile(path)

    single = os.path.join(str(tmpdir), 'rate.png')
    plot_sweep(t, 'transmit_power_dbm', single, columns=('rate',))
    assert os.path.isfile(single)


def test_plot_convergence(tmpdir):
    path = os.path.join(str(tmpdir), 'convergence.png')
    plot_convergence([np.array([0.1, 0.3, 0.31]), np.array([0.2, 0.2])], path)
    assert os.path.isfile(path)
