# Configuration file for the Sphinx documentation builder.
#
# For the full list of options see
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import os
import sys

sys.path.insert(0, os.path.abspath("../"))

from mrpz import __version__

# -- Project information -----------------------------------------------------
project = "MRPZ"
copyright = "2026, MRPZ developers"
author = "MRPZ developers"

# The full version, including alpha/beta/rc tags
release = __version__

# -- General configuration ---------------------------------------------------

extensions = ["sphinx.ext.autodoc", "sphinx.ext.intersphinx", "sphinx.ext.mathjax", "sphinx_exec_code"]

templates_path = ["_templates"]

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"

autodoc_default_options = {
    "members": None,
    "undoc-members": True,
    "member-order": "bysource",
    "special-members": "__call__, __add__, __sub__",
}

autodoc_type_aliases = {
    "ValidSystemType": "mrpz.statespace.ValidSystemType",
    "PointsType": "mrpz.moments.PointsType",
}

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "scipy": ("https://docs.scipy.org/doc/scipy", None),
}
