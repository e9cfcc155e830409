"""rcslab: simulation lab for noisy Haar random circuits."""

__version__ = "0.3.0"
