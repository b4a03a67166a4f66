"""Coinless discrete-time quantum walks and the symmetric binary-tree walk."""

__version__ = "0.1.0"
