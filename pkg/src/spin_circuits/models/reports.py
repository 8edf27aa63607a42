"""Report Data Models

Pydantic models for the results the CLI and MCP tools return.
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class OptimizationReport(BaseModel):
    """Best restart of a variational optimization."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"params": [0.1, 2.3], "cost": 1.2e-13, "fidelity": 0.9999999, "iterations": 41,
                        "trace": [3.1, 0.4, 1.2e-13], "seed": 7, "restart": 2, "converged": True}
        }
    )

    params: List[float] = Field(description="Optimal parameters in radians")
    cost: float = Field(ge=0.0, description="Final cost value")
    fidelity: Optional[float] = Field(default=None, description="Overlap with the exact target state, if known")
    iterations: int = Field(ge=0, description="Conjugate-gradient iterations of the best restart")
    trace: List[float] = Field(description="Cost after every accepted iteration, starting point first")
    seed: int = Field(ge=0, description="Root seed of the restarts")
    restart: int = Field(ge=0, description="Index of the winning restart")
    converged: bool = Field(description="Whether the gradient tolerance was met")


class EstimateReport(BaseModel):
    """Raw, mitigated and extrapolated estimates of one observable."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"observable": "S2", "exact": 3.75, "raw": 3.58, "em": 3.66, "em_re": 3.74,
                        "slope": -0.04, "points": [[1, 3.66], [3, 3.58], [5, 3.5]]}
        }
    )

    observable: str = Field(description="Observable name, e.g. Sz, S2 or S2_01")
    exact: float = Field(description="Noiseless expectation value")
    raw: float = Field(description="Unmitigated estimate")
    em: float = Field(description="Readout-mitigated estimate")
    em_re: float = Field(description="Readout-mitigated estimate extrapolated to zero noise")
    slope: float = Field(description="Fitted change per unit noise scale")
    points: List[List[float]] = Field(description="(noise scale r, mitigated estimate) pairs")


class TomographyReport(BaseModel):
    """Fidelity and purity of a reconstructed state."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"fidelity_raw": 0.93, "fidelity_projected": 0.92, "purity": 0.87,
                        "settings": 27, "shots_per_setting": 8192, "fidelity_extrapolated": None}
        }
    )

    fidelity_raw: float = Field(description="<psi|rho|psi> of the linear-inversion estimate")
    fidelity_projected: float = Field(description="<psi|rho|psi> after PSD projection")
    purity: float = Field(description="Tr(rho^2) of the projected estimate")
    settings: int = Field(ge=1, description="Number of local measurement settings")
    shots_per_setting: Optional[int] = Field(default=None, description="Shots per setting; null for exact data")
    fidelity_extrapolated: Optional[float] = Field(
        default=None, description="Projected fidelity extrapolated to zero noise, when requested"
    )


class GateCountRow(BaseModel):
    """Model versus compiled gate counts for chain circuits on n qubits."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"n": 3, "model_cnot": 24, "model_single": 20, "compiled_cnot_max": 6,
                        "compiled_single_max": 14, "labelings": 8}
        }
    )

    n: int = Field(ge=2, description="Number of spins")
    model_cnot: int = Field(ge=0, description="CNOT count from the cost recursion")
    model_single: int = Field(ge=0, description="Single-qubit count from the cost recursion")
    compiled_cnot_max: Optional[int] = Field(default=None, description="Largest compiled CNOT count over labelings")
    compiled_single_max: Optional[int] = Field(
        default=None, description="Largest compiled single-qubit count over labelings"
    )
    labelings: int = Field(ge=0, description="Number of chain states compiled")
