"""Incremental stable matching: solvers, reductions, samplers and experiments."""
__version__ = "0.1.0"
