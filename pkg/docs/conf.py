#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# syntaxdist documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

os.environ["BUILDING_DOCS"] = "1"


# -- General configuration ------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
]

templates_path = ["_templates"]

source_suffix = ".rst"

master_doc = "index"

project = "syntaxdist"
copyright = "2026, syntaxdist contributors"
author = "syntaxdist contributors"

from syntaxdist import __version__

version = __version__
release = __version__

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

pygments_style = "sphinx"

default_role = "any"


# -- Options for HTML output ----------------------------------------------

html_theme = "sphinx_rtd_theme"

htmlhelp_basename = "syntaxdistdoc"


# -- Options for extensions -----------------------------------------------

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
    "networkx": ("https://networkx.org/documentation/stable/", None),
}

napoleon_numpy_docstring = True
napoleon_google_docstring = False

autodoc_member_order = "bysource"
