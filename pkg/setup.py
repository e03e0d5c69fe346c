#!/usr/bin/env python
# Licensed under a 3-clause BSD style license - see LICENSE.rst

import glob
import sys

from configparser import ConfigParser

from setuptools import find_packages, setup

# Get some values from the setup.cfg
conf = ConfigParser()
conf.read(['setup.cfg'])
metadata = dict(conf.items('metadata'))

PACKAGENAME = metadata.get('package_name', 'robustia')
DESCRIPTION = metadata.get('description', '')
AUTHOR = metadata.get('author', '')
AUTHOR_EMAIL = metadata.get('author_email', '')
LICENSE = metadata.get('license', 'unknown')
URL = metadata.get('url', '')
__minimum_python_version__ = metadata.get("minimum_python_version", "3.8")

# Enforce Python version check - this is the same check as in __init__.py
if sys.version_info < tuple((int(val) for val in __minimum_python_version__.split('.'))):
    sys.stderr.write("ERROR: robustia requires Python {} or later\n".format(__minimum_python_version__))
    sys.exit(1)


def _split(key, default=''):
    return [s.strip() for s in metadata.get(key, default).split(',') if s.strip()]


# order of priority for long_description:
#   (1) set in setup.cfg,
#   (2) load README*
readme_glob = 'README*'
LONG_DESCRIPTION = metadata.get('long_description', '')
if not LONG_DESCRIPTION and len(glob.glob(readme_glob)) > 0:
    with open(glob.glob(readme_glob)[0]) as f:
        LONG_DESCRIPTION = f.read()

# VERSION should be PEP440 compatible (http://www.python.org/dev/peps/pep-0440)
VERSION = metadata.get('version', '0.0.dev')

# Define entry points for command-line scripts
entry_points = {'console_scripts': []}

if conf.has_section('entry_points'):
    entry_point_list = conf.items('entry_points')
    for entry_point in entry_point_list:
        entry_points['console_scripts'].append('{0} = {1}'.format(
            entry_point[0], entry_point[1]))

setup(name=PACKAGENAME,
      version=VERSION,
      description=DESCRIPTION,
      install_requires=_split('install_requires', 'astropy'),
      extras_require={'test': _split('tests_require'), 'docs': _split('docs_require')},
      author=AUTHOR,
      author_email=AUTHOR_EMAIL,
      license=LICENSE,
      url=URL,
      long_description=LONG_DESCRIPTION,
      zip_safe=False,
      entry_points=entry_points,
      python_requires='>={}'.format(__minimum_python_version__),
      packages=find_packages(),
      )
