"""Numerical ranges of matrices with respect to families of orthogonal projections."""

__version__ = "0.1.0"
