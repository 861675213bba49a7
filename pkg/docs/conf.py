#
# OFDM Timing Synchronization Lab documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import os
import re
import sys

# The package is imported by autodoc from the repo root.
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration -----------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'OFDM Timing Synchronization Lab'
copyright = u'2024'

# The version is read from the package, the same way setup.py does it.
with open(os.path.join('..', 'ofdm_timesync', '__init__.py')) as f:
    release = re.search(r'__version__ = "([^"]+)"', f.read()).group(1)
version = '.'.join(release.split('.')[:2])

exclude_patterns = ['_build']
pygments_style = 'sphinx'

autodoc_member_order = 'bysource'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = []
htmlhelp_basename = 'OfdmTimesyncdoc'

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
  ('index', 'OfdmTimesync.tex', u'OFDM Timing Synchronization Lab Documentation',
   u'', 'manual'),
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'ofdm-timesync', u'OFDM Timing Synchronization Lab Documentation',
     [], 1)
]
