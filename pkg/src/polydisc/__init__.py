"""Finite-truncation workbench for Hilbert modules over the polydisc."""

__version__ = "0.1.0"
