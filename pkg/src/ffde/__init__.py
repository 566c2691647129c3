"""Verification engine for the universally free logics FFDE and FN4."""

__version__ = "0.1.0"
