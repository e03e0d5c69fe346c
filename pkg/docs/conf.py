# -*- coding: utf-8 -*-
# Licensed under a 3-clause BSD style license - see LICENSE.rst
#
# robustia documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import datetime
import importlib
import os
import sys

from configparser import ConfigParser

from sphinx_astropy.conf.v1 import *  # noqa

# -- General configuration ----------------------------------------------------

conf = ConfigParser()

sys.path.insert(0, os.path.abspath('../'))
conf.read([os.path.join(os.path.dirname(__file__), '..', 'setup.cfg')])
setup_cfg = dict(conf.items('metadata'))

intersphinx_mapping.update({  # noqa
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'matplotlib': ('https://matplotlib.org/stable/', None),
})

exclude_patterns.append('_build')  # noqa

# -- Project information ------------------------------------------------------

project = setup_cfg['package_name']
author = setup_cfg['author']
copyright = '{0}, {1}'.format(datetime.datetime.now().year, author)

package = importlib.import_module(setup_cfg['package_name'])
# The short X.Y version.
version = package.__version__.split('-', 1)[0]
# The full version, including alpha/beta/rc tags.
release = package.__version__

# -- Options for HTML output --------------------------------------------------

html_title = '{0} v{1}'.format(project, release)
html_last_updated_fmt = '%b %d, %Y'
htmlhelp_basename = project + 'doc'

# -- Options for LaTeX output -------------------------------------------------

latex_documents = [('index', project + '.tex', project + u' Documentation', author, 'manual')]

# -- Options for manual page output -------------------------------------------

man_pages = [('index', project.lower(), project + u' Documentation', [author], 1)]
