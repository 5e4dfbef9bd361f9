"""Syntactic distances between languages from part-of-speech n-gram statistics."""

__version__ = "1.0.0"

MIN_PYTHON_VERSION = (3, 8, 0)
