# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""Robust interference-alignment transceivers for multi-cell MIMO networks.

Two-stage transmit beamformers (a gated Grassmannian outer stage and an
SLNR-constrained inner stage), energy-efficient power allocation and
minor-subspace tracking receive filters, evaluated over time-correlated
channels with imperfect channel knowledge.
"""

# Packages may add whatever they like to this file, but
# should keep this content at the top.
# ----------------------------------------------------------------------------
from ._astropy_init import *
# ----------------------------------------------------------------------------

# Enforce Python version check during package import.
# This is the same check as the one at the top of setup.py
import sys

from astropy import config as _config

__minimum_python_version__ = "3.8"


class UnsupportedPythonError(Exception):
    pass


if sys.version_info < tuple((int(val) for val in __minimum_python_version__.split('.'))):
    raise UnsupportedPythonError("robustia does not support Python < {}".format(__minimum_python_version__))


class Conf(_config.ConfigNamespace):
    """
    Configuration parameters for `robustia`.
    """
    monte_carlo_drops = _config.ConfigItem(
        100, 'Default number of independent drops per sweep value.')
    significant_digits = _config.ConfigItem(
        12, 'Significant digits of floating-point values in exported tables.')
    debug_checks = _config.ConfigItem(
        False, 'Re-check result invariants after every simulated instant.')


conf = Conf()

from .exceptions import *
from .config import NetworkConfig, load_config, parse_config, save_config
from .simulation import (World, MetricsRecord, run_instant, run_scenario, SweepSpec, sweep,
                         compare_baselines, ee_convergence)
