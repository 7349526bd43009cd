"""Demand estimation and vehicle positioning for flag-down ride hailing."""

__version__ = "0.1.0"
