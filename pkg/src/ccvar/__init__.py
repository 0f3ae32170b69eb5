"""Algebraic coupled cluster: exponential parametrization, truncation varieties and CC solving."""
__version__ = "0.1.0"
