"""Sparse group l0-regularized optimization over boxes."""

__version__ = "0.1.0"
SCHEMA_VERSION = 1
