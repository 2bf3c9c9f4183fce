"""Proof hypergraphs over a small dependent type theory of natural numbers."""
__version__ = "0.1.0"
