"""Curve-fit tail-index estimation and probability-preserving extreme prediction."""

__version__ = "0.1.0"
