"""Macro/micro constrained ranking controllers and their simulator."""

__version__ = "0.1.0"
