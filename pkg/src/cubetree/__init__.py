"""Deterministic simulator and verification workbench for tree-of-strategies
priority constructions over labeled cube structures."""

__version__ = "0.1.0"
