"""Categorial grammar, tensor semantics and their quantum-circuit simulation."""

__version__ = "0.1.0"
