"""Numerical lab for qubits with random, time-independent Hamiltonians."""

__version__ = "0.1.0"
