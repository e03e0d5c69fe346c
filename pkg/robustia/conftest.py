# This file is used to configure the behavior of pytest when using the Astropy
# test infrastructure.

import numpy as np
import pytest

try:
    from pytest_astropy_header.display import PYTEST_HEADER_MODULES, TESTED_VERSIONS
except ImportError:
    PYTEST_HEADER_MODULES = {}
    TESTED_VERSIONS = {}

from .config import NetworkConfig

try:
    PYTEST_HEADER_MODULES['Astropy'] = 'astropy'
    PYTEST_HEADER_MODULES['SciPy'] = 'scipy'
    PYTEST_HEADER_MODULES['Matplotlib'] = 'matplotlib'
    del PYTEST_HEADER_MODULES['h5py']
    del PYTEST_HEADER_MODULES['Pandas']
except KeyError:
    pass

from ._astropy_init import __version__
TESTED_VERSIONS['robustia'] = __version__ or 'dev'


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    """Two cells, two users, fast solver settings."""
    return NetworkConfig(B=2, K=2, M=6, N=2, d=1, T=2, T_train=200, L_max=10, cggm_max_iter=100,
                         seed=7)
