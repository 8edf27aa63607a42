"""Spin Circuits Utilities

This package contains the error hierarchy, seed derivation and output writing.
"""

__all__ = [
    "errors",
    "seeding",
    "io",
]
