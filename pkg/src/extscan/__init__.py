"""extscan: static security analysis for browser extensions."""

__version__ = "0.1.0"
