"""Researcher mobility and collaboration analytics from publication metadata.

The package turns line-delimited publication records into disambiguated
researchers, mobility typologies, demographic attributes, country-level
networks and a machine-readable indicator suite.  See the ``cli`` module
for the end-to-end pipeline.
"""

__version__ = "0.1.0"
