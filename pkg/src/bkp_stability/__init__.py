"""Transverse spectral stability of small periodic b-KP waves."""

__version__ = "0.1.0"
