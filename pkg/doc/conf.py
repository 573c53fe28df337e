#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

import os
import time
from importlib import metadata

import sphinx_rtd_theme


needs_sphinx = '1.3'

extensions = [
    'sphinx.ext.todo',
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    ]

# references other manuals cannot resolve are listed in this file
nitpicky = False
nitpick_ignore = []
if os.path.exists('nitpick-exceptions.txt'):
  for line in open('nitpick-exceptions.txt'):
    if line.strip() == "" or line.startswith("#"):
      continue
    dtype, target = line.split(None, 1)
    nitpick_ignore.append((dtype, target.strip()))

todo_include_todos = True

source_suffix = '.rst'
master_doc = 'index'

project = u'bob.learn.tempgraph'
copyright = u'%s, the bob.learn.tempgraph developers' % time.strftime('%Y')
version = release = metadata.version(project)

pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
htmlhelp_basename = project.replace('.', '_') + u'_doc'

autoclass_content = 'class'
autodoc_member_order = 'bysource'
autodoc_default_options = {
  "members": True,
  "undoc-members": True,
  "show-inheritance": True,
}

intersphinx_mapping = {
  'python': ('https://docs.python.org/3', None),
  'numpy': ('https://numpy.org/doc/stable', None),
  'torch': ('https://pytorch.org/docs/stable', None),
  'networkx': ('https://networkx.org/documentation/stable', None),
  'pandas': ('https://pandas.pydata.org/docs', None),
  'sqlalchemy': ('https://docs.sqlalchemy.org/en/20', None),
}
if os.path.exists('extra-intersphinx.txt'):
  for line in open('extra-intersphinx.txt'):
    if line.strip() == "" or line.startswith("#"):
      continue
    name, url = line.split(None, 1)
    intersphinx_mapping[name] = (url.strip(), None)
