#
# Configuration file for the Sphinx documentation builder.
#
# This file does only contain a selection of the most common options. For a
# full list see the documentation:
# http://www.sphinx-doc.org/en/master/config

from datetime import date
from typing import Dict

# -- Project information -----------------------------------------------------

project = "Ionaddress"
copyright = f"{date.today().year}, Ion Addressing Developers"
author = "Ion Addressing Developers"

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.doctest",
    "sphinx.ext.coverage",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
]

templates_path = ["_templates"]

source_suffix = ".rst"

# The master toctree document.
master_doc = "index"

language = "en"

exclude_patterns = [
    "_build",
    "Thumbs.db",
    ".DS_Store",
]

pygments_style = None

autodoc_member_order = "bysource"

# -- Options for HTML output -------------------------------------------------

html_theme = "furo"
html_title = "Ionaddress"

# -- Options for HTMLHelp output ---------------------------------------------

htmlhelp_basename = "Ionaddressdoc"

# -- Options for LaTeX output ------------------------------------------------

latex_elements: Dict[str, str] = {}

latex_documents = [
    (master_doc, "Ionaddress.tex", "Ionaddress Documentation", author, "manual")
]

# -- Options for manual page output ------------------------------------------

man_pages = [(master_doc, "ionaddress", "Ionaddress Documentation", [author], 1)]

# -- Options for Epub output -------------------------------------------------

epub_title = project
epub_exclude_files = ["search.html"]
