"""Circuit, Coupling Tree and Observable Data Models

Pydantic wire forms of the core circuit, tree and observable types.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..circuit import Circuit, Gate, GateKind
from ..pauli import ObservableSum
from ..spin import CouplingTree, tree_from_json, tree_to_json


class GateModel(BaseModel):
    """One gate; controlled gates nest their base gate."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"kind": "controlled", "qubits": [2, 0], "polarity": "zero",
                        "base": {"kind": "ry", "qubits": [0], "angle": 1.5707963267948966}}
        }
    )

    kind: GateKind = Field(description="Gate kind")
    qubits: List[int] = Field(description="Qubits acted on; for controlled gates the control comes first")
    angle: Optional[float] = Field(default=None, description="Rotation angle in radians (rx/ry/rz only)")
    polarity: Optional[Literal["one", "zero"]] = Field(default=None, description="Control polarity")
    base: Optional["GateModel"] = Field(default=None, description="Controlled base gate")
    matrix: Optional[List[List[List[float]]]] = Field(
        default=None, description="Custom unitary as [re, im] pairs, row major"
    )

    def to_gate(self) -> Gate:
        return Gate.from_json(self.model_dump(exclude_none=True, mode="json"))

    @classmethod
    def from_gate(cls, gate: Gate) -> "GateModel":
        return cls.model_validate(gate.to_json())


class CircuitModel(BaseModel):
    """Ordered gate list over ``n`` qubits."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"n": 2, "gates": [{"kind": "ry", "qubits": [0], "angle": -1.5707963267948966},
                                          {"kind": "cnot", "qubits": [0, 1]}, {"kind": "x", "qubits": [1]}]}
        }
    )

    n: int = Field(ge=0, description="Register size")
    gates: List[GateModel] = Field(default_factory=list, description="Gates in time order")

    def to_circuit(self) -> Circuit:
        return Circuit(self.n, tuple(g.to_gate() for g in self.gates))

    @classmethod
    def from_circuit(cls, circuit: Circuit) -> "CircuitModel":
        return cls.model_validate(circuit.to_json())


class CouplingTreeModel(BaseModel):
    """A leaf ``{"leaf": q}`` or a node with ``left``, ``right`` and an optional spin ``l``."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"l": "1/2", "left": {"l": "1", "left": {"leaf": 0}, "right": {"leaf": 1}},
                        "right": {"leaf": 2}}
        }
    )

    leaf: Optional[int] = Field(default=None, ge=0, description="Qubit index of a leaf")
    l: Optional[str] = Field(default=None, description="Node spin as an integer or half-integer string")
    left: Optional["CouplingTreeModel"] = Field(default=None, description="Left subtree")
    right: Optional["CouplingTreeModel"] = Field(default=None, description="Right subtree")

    def to_tree(self) -> CouplingTree:
        return tree_from_json(self.model_dump(exclude_none=True))

    @classmethod
    def from_tree(cls, tree: CouplingTree) -> "CouplingTreeModel":
        return cls.model_validate(tree_to_json(tree))


class ObservableTermModel(BaseModel):
    """One weighted Pauli string, qubit 0 leftmost."""

    model_config = ConfigDict(json_schema_extra={"example": {"coeff": 0.5, "pauli": "XXI"}})

    coeff: float = Field(description="Real coefficient")
    pauli: str = Field(pattern=r"^[IXYZixyz]+$", description="Pauli label")

    @staticmethod
    def to_observable(terms: List["ObservableTermModel"]) -> ObservableSum:
        return ObservableSum.from_json([t.model_dump() for t in terms])

    @classmethod
    def from_observable(cls, obs: ObservableSum) -> List["ObservableTermModel"]:
        return [cls(coeff=c, pauli=p.label) for c, p in obs.terms]
