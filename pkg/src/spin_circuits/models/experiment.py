"""Experiment Configuration Model

The validated configuration shared by every experiment command. Keys mirror
the CLI flags; a JSON config file supplies defaults that flags override.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..synthesis import BowtieLabels, ChainLabels, Labels, parse_labels
from ..utils.errors import ConfigError
from ..utils.io import config_hash

System = Literal["chain-3", "chain-n", "bowtie-5"]
Method = Literal["erc", "vqe-ry", "vqe-timeevo"]


class ExperimentConfig(BaseModel):
    """One experiment: target state, preparation method, noise and sampling."""

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "system": "chain-3",
                "target": "l01=1,l=3/2,m=-1/2",
                "method": "erc",
                "noise": "default_noise.json",
                "shots": 8192,
                "ks": [0, 1, 2],
                "seed": 7,
                "em": True,
                "re": True,
            }
        },
    )

    system: System = Field(default="chain-3", description="Spin system")
    target: Optional[str] = Field(default=None, description="Target labels, e.g. l01=1,l=3/2,m=-1/2")
    method: Method = Field(default="erc", description="State preparation method")
    depth: int = Field(default=3, ge=0, description="Ry ansatz repetitions")
    reps: int = Field(default=2, ge=1, description="Time-evolution ansatz repetitions")
    restarts: int = Field(default=10, ge=1, description="Optimizer restarts")
    max_iters: int = Field(default=500, ge=1, description="Conjugate-gradient iteration limit")
    noise: Optional[str] = Field(default=None, description="Path to a NoiseModel JSON file")
    shots: Optional[int] = Field(default=None, ge=1, description="Shots per setting; null for exact distributions")
    ks: List[int] = Field(default_factory=lambda: [0, 1, 2], description="CNOT folding counts")
    seed: int = Field(default=0, ge=0, description="Root seed")
    em: bool = Field(default=True, description="Apply readout-error mitigation")
    re: bool = Field(default=True, description="Apply Richardson extrapolation")
    out: Optional[str] = Field(default=None, description="Output CSV path")

    @field_validator("ks")
    @classmethod
    def validate_ks(cls, v: List[int]) -> List[int]:
        if any(k < 0 for k in v):
            raise ValueError(f"Folding counts must be non-negative, got {v}")
        if len(set(v)) != len(v):
            raise ValueError(f"Folding counts must be distinct, got {v}")
        return v

    @model_validator(mode="after")
    def validate_target(self) -> "ExperimentConfig":
        if self.target is None:
            return self
        labels = parse_labels(self.target)
        if self.system == "bowtie-5" and not isinstance(labels, BowtieLabels):
            raise ValueError("bowtie-5 targets use lL, lLC, lR, l, m")
        if self.system != "bowtie-5" and not isinstance(labels, ChainLabels):
            raise ValueError(f"{self.system} targets use chain labels")
        if self.system == "chain-3" and labels.n != 3:
            raise ValueError(f"chain-3 targets cover 3 spins, got {labels.n}")
        if self.method == "vqe-timeevo" and not isinstance(labels, ChainLabels):
            raise ValueError("The time-evolution ansatz needs a chain target")
        return self

    def labels(self) -> Labels:
        """Parsed target labels.

        Raises:
            ConfigError: If no target is configured
        """
        if self.target is None:
            raise ConfigError("This command needs --target")
        return parse_labels(self.target)

    def canonical(self) -> Dict[str, Any]:
        """JSON form used for hashing; the output path is excluded."""
        return self.model_dump(mode="json", exclude={"out"})

    @property
    def hash(self) -> str:
        return config_hash(self.canonical())

    @classmethod
    def load(
        cls,
        path: Optional[str | Path] = None,
        defaults: Optional[Dict[str, Any]] = None,
        **overrides: Any,
    ) -> "ExperimentConfig":
        """Command defaults, then config file values, then explicit (non-None) overrides.

        Raises:
            ConfigError: If the config file cannot be read
        """
        data: Dict[str, Any] = dict(defaults or {})
        if path is not None:
            try:
                loaded = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"Cannot read config file {path}: {e}") from e
            if not isinstance(loaded, dict):
                raise ConfigError(f"Config file {path} must hold a JSON object")
            data.update(loaded)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data)
