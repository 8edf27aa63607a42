"""Spin Circuits Tools

This package contains the pipeline functions behind the CLI commands and the
MCP tools.
"""

__all__ = [
    "state_tools",
    "variational_tools",
    "measurement_tools",
]
