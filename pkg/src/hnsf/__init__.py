"""Harmonic-plus-noise neural source-filter vocoder with a trainable maximum voice frequency."""
from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
