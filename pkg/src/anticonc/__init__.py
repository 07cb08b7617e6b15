"""Exact second moments of local random quantum circuits."""
__version__ = "0.1.0"
