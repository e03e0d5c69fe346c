# Licensed under a 3-clause BSD style license - see LICENSE.rst

__all__ = ['__version__', 'test']

import os

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version(__package__)
except PackageNotFoundError:
    __version__ = ''

# Create the test function for self test
from astropy.tests.runner import TestRunner
test = TestRunner.make_test_runner_in(os.path.dirname(__file__))
