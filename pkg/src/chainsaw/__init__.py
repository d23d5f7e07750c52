"""Exact computations with chainsaw quiver data, monads and affine weights."""

__version__ = "0.1.0"
