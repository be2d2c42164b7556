"""Exact checks of contraction-type conditions on small metric spaces."""

__version__ = "0.1.0"
