"""Circuits that prepare total-spin eigenstates of spin-1/2 registers."""

__version__ = "0.1.0"
