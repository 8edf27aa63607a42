"""Spin Circuits Data Models

This package contains Pydantic models for noise, circuits, experiment
configuration and reports.
"""

__all__ = [
    "simulation",
    "circuit",
    "experiment",
    "reports",
]
