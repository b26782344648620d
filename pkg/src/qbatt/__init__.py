"""Collisional charging of a ladder quantum battery by a stream of qubits."""

__version__ = "0.1.0"
