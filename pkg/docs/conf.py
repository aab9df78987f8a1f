import os
import sys
from importlib.metadata import version

# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here. If the directory is relative to the
# documentation root, use os.path.abspath to make it absolute, like shown here.
sys.path.append(os.path.abspath("."))
sys.path.append(os.path.abspath(".."))

# -- General configuration -----------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.autosectionlabel",
]

autoclass_content = "both"

autosectionlabel_prefix_document = True

# The suffix of source filenames.
source_suffix = ".rst"

# The master toctree document.
master_doc = "index"

# General information about the project.
project = "priority-mm1"
copyright = "2024, the priority-mm1 developers."

# The full version, including alpha/beta/rc tags.
release = version("priority-mm1")
# The short X.Y version.
version = ".".join(release.split(".")[:2])

pygments_style = "sphinx"

# -- Options for HTML output ---------------------------------------------------

html_theme = "sphinx_rtd_theme"

htmlhelp_basename = "priority-mm1"

# -- Options for manual page output --------------------------------------------

man_pages = [
    (
        "index",
        "priority-mm1",
        "priority-mm1 Documentation",
        ["the priority-mm1 developers"],
        1,
    )
]

intersphinx_mapping = {
    "tablib": ("https://tablib.readthedocs.io/en/stable/", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}
