"""Quantum forest and bipartiteness testing by reduction to st-connectivity."""
__version__ = "0.1.0"
