"""Noise and Sampling Data Models

Pydantic models for the parametric noise model and for seeded shot results.
"""

import json
from importlib import resources
from pathlib import Path
from typing import Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.errors import ConfigError


class NoiseModel(BaseModel):
    """Depolarizing gate noise plus per-qubit readout confusion.

    ``readout`` holds column-stochastic 2x2 matrices M[outcome][prepared]; a
    single entry applies to every qubit and an empty list means perfect readout.
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "p1": 0.001,
                "p2": 0.01,
                "readout": [[[0.98, 0.02], [0.02, 0.98]]],
            }
        },
    )

    p1: float = Field(default=0.0, ge=0.0, le=1.0, description="Depolarizing probability after each single-qubit gate")
    p2: float = Field(default=0.0, ge=0.0, le=1.0, description="Two-qubit depolarizing probability after each CNOT")
    readout: List[List[List[float]]] = Field(
        default_factory=list,
        description="Per-qubit column-stochastic confusion matrices (one entry broadcasts to all qubits)",
    )

    @field_validator("readout")
    @classmethod
    def validate_readout(cls, v: List[List[List[float]]]) -> List[List[List[float]]]:
        for index, mat in enumerate(v):
            arr = np.asarray(mat, dtype=float)
            if arr.shape != (2, 2):
                raise ValueError(f"readout[{index}] must be 2x2, got shape {arr.shape}")
            if (arr < 0).any():
                raise ValueError(f"readout[{index}] has negative entries")
            if not np.allclose(arr.sum(axis=0), 1.0, atol=1e-12):
                raise ValueError(f"readout[{index}] columns must sum to 1")
        return v

    def readout_matrix(self, qubit: int) -> np.ndarray:
        """Confusion matrix for ``qubit``."""
        if not self.readout:
            return np.eye(2)
        if len(self.readout) == 1:
            return np.asarray(self.readout[0], dtype=float)
        if qubit >= len(self.readout):
            raise ConfigError(
                f"Noise model lists readout for {len(self.readout)} qubits, qubit {qubit} requested"
            )
        return np.asarray(self.readout[qubit], dtype=float)

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0 and self.has_perfect_readout

    @property
    def has_perfect_readout(self) -> bool:
        return all(np.allclose(m, np.eye(2)) for m in self.readout)

    def with_p2(self, p2: float) -> "NoiseModel":
        return self.model_copy(update={"p2": p2})

    def without_readout(self) -> "NoiseModel":
        return self.model_copy(update={"readout": []})

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def from_file(cls, path: str | Path) -> "NoiseModel":
        """Load a NoiseModel JSON file.

        Raises:
            ConfigError: If the file is missing or malformed
        """
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read noise model from {path}: {e}") from e
        return cls.model_validate(data)

    @classmethod
    def default(cls) -> "NoiseModel":
        """The in-repo default: p1=0.001, p2=0.01, 2% symmetric readout flips."""
        text = resources.files("spin_circuits").joinpath("data/default_noise.json").read_text()
        return cls.model_validate(json.loads(text))


class ShotResult(BaseModel):
    """Seeded measurement counts keyed by bitstring (qubit 0 leftmost)."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"seed": 7, "shots": 100, "counts": {"01": 52, "10": 48}}},
    )

    seed: int = Field(ge=0, description="Seed of the counter-based generator that drew the samples")
    shots: int = Field(ge=1, description="Total number of shots")
    counts: Dict[str, int] = Field(description="Outcome counts keyed by bitstring")

    @model_validator(mode="after")
    def counts_match_shots(self) -> "ShotResult":
        if sum(self.counts.values()) != self.shots:
            raise ValueError(f"Counts sum to {sum(self.counts.values())}, expected {self.shots}")
        return self

    def probabilities(self, n: int) -> np.ndarray:
        """Empirical distribution indexed by basis index."""
        probs = np.zeros(2 ** n)
        for bits, count in self.counts.items():
            if len(bits) != n:
                raise ConfigError(f"Bitstring {bits!r} does not match {n} qubits")
            probs[int(bits, 2)] = count
        return probs / self.shots
