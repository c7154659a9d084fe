"""Discrete laboratory for Muckenhoupt weights, BMO norms and commutators."""

__version__ = "0.1.0"
