"""Numerical workbench for gradient Yamabe solitons."""

__version__ = "0.1.0"
