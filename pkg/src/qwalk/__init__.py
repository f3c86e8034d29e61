"""Exact desk-scale simulation of quantum-walk search and quantum-Metropolis annealing."""

__version__ = "0.1.0"
