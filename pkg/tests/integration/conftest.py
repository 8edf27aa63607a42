"""Integration test fixtures for the CLI and the MCP tools."""
import csv
import json

import pytest
from typer.testing import CliRunner


@pytest.fixture
def runner():
    """Click runner for the spin-circuits app."""
    return CliRunner()


@pytest.fixture
def read_output():
    """Parse a CSV written with --out and its JSON sidecar.

    Returns (schema line, rows as dicts, sidecar dict).
    """
    def read(path):
        with open(path, newline="") as handle:
            schema = handle.readline().strip()
            rows = list(csv.DictReader(handle))
        with open(f"{path}.json") as handle:
            sidecar = json.load(handle)
        return schema, rows, sidecar

    return read


@pytest.fixture
def noiseless_file(tmp_path):
    path = tmp_path / "noiseless.json"
    path.write_text(json.dumps({"p1": 0.0, "p2": 0.0, "readout": []}))
    return path
