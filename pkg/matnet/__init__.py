"""Tests for the spatial precision matrix of matrix-normal (Kronecker) data."""

__version__ = "1.0.0"
