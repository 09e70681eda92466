"""Cohomological obstructions to quasiregular ellipticity, and numerical labs."""

__version__ = "0.1.0"
SCHEMA = "qre-toolkit/1"
