"""Exact verification toolkit for the classification of log Enriques surfaces with delta = 1."""

__version__ = "0.1.0"
