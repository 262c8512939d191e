# -*- coding: utf-8 -*-
#
# Sphinx configuration of the wearclust documentation

import os
import sys
import sphinx_rtd_theme

sys.path.insert(0, os.path.abspath('..'))

import wearclust


extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinxcontrib.napoleon',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'wearclust'
copyright = u'2026, wearclust developers'
author = u'wearclust developers'

version = wearclust.__version__
release = wearclust.__version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = False

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_static_path = ['_static']
htmlhelp_basename = 'wearclustdoc'

latex_documents = [
    (master_doc, 'wearclust.tex', u'wearclust Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'wearclust', u'wearclust Documentation', [author], 1),
]
