"""Rough-path norms of Gaussian processes and Fernique-type tail experiments."""

__version__ = "0.1.0"
