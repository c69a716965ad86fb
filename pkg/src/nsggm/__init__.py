"""Correct-by-construction molecule generation from motif blueprints."""

__version__ = "0.1.0"
