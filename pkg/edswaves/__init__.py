"""Exact symbolic workbench for travelling-wave reductions of evolution equations."""

__version__ = "0.1.0"
