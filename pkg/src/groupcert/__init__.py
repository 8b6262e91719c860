"""Exact certification of minimal and facet-defining periodic PL functions."""

__version__ = "0.1.0"
