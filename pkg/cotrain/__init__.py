"""Sim-and-real co-training workbench."""

__version__ = "0.1.1"
