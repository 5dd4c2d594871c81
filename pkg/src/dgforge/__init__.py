"""Exact computations with dg-categories, bimodules and their derived invariants."""

__version__ = "0.1.0"
