# Sphinx configuration for the forecasting documentation.

# Standard library
import os
import sys

# Third-party
import django

sys.path.insert(0, os.path.abspath(".."))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "forecasting.settings.dev")
django.setup()

# -- General configuration ------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.doctest",
    "sphinx.ext.intersphinx",
    "sphinx.ext.todo",
    "sphinx.ext.viewcode",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "forecasting"
copyright = "2022, forecasting developers"
author = "forecasting developers"

version = "0.1"
release = "0.1"

language = "en"
exclude_patterns = ["_build"]
pygments_style = "sphinx"
todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = "alabaster"
html_static_path = []
htmlhelp_basename = "forecastingdoc"

# -- Options for LaTeX and manual page output -----------------------------

latex_documents = [
    (
        master_doc,
        "forecasting.tex",
        "Forecasting Documentation",
        author,
        "manual",
    ),
]

man_pages = [
    (master_doc, "forecasting", "Forecasting Documentation", [author], 1)
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "pandas": ("https://pandas.pydata.org/docs/", None),
}
