"""Quantum-plasmonic nanoring metamaterial simulations."""

__version__ = "0.1.0"
