# -*- coding: utf-8 -*-
#
# sandwich documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import sys
import os

source_path = os.path.abspath(os.path.dirname(os.path.abspath(__file__)) + '../../../')
sys.path.append(source_path)

import sphinx_rtd_theme
import sandwich.version

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.ifconfig', 'sphinx.ext.autosummary', 'sphinx.ext.mathjax']

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'sandwich'
copyright = u'2021, The sandwich authors'

version = sandwich.version.version()
release = sandwich.version.version()

exclude_patterns = []

pygments_style = 'sphinx'

# -- Options for HTML output ---------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

html_static_path = ['_static']

htmlhelp_basename = 'sandwichdoc'

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('cli', 'sandwich', u'optical sandwich simulation and virtual spring measurement',
     [u'The sandwich authors'], 1)
]

autoclass_content = 'both'
