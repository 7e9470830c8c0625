"""Utility representations of parameter-dependent preferences on sampled parameter spaces."""

__version__ = "0.1.0"
