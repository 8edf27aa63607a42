"""Test fixtures for spin-circuits tests.

Contains hand-written reference eigenstates and shared pytest fixtures.
"""

__all__ = ["oracle_states", "conftest"]
