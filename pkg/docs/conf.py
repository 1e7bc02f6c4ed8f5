# -*- coding: utf-8 -*-
#
# pivlink documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import pivlink

# -- General configuration -----------------------------------------------------

autopackage_name = ['pivlink']

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.autosummary',
              'sphinx.ext.mathjax',
              'sphinx.ext.viewcode',
              'numpydoc']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'pivlink'
copyright = u'2026, the pivlink developers'

# The short X.Y version and the full version, including alpha/beta/rc tags.
version = pivlink.__version__
release = pivlink.__version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'default'
html_static_path = ['_static']
htmlhelp_basename = 'pivlinkdoc'

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'pivlink', u'pivlink Documentation',
     [u'the pivlink developers'], 1)
]
