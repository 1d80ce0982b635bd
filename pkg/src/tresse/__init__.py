"""Tresse - point differential invariants of second-order ODEs."""

__version__ = "0.1.0"
