"""Gate-level circuit representation.

Circuits are immutable tuples of gates. Passes (lowering to the native set,
peephole simplification, CNOT folding) return new circuits. All equality
contracts hold up to a global phase.

Native set: X, Y, Z, H, RX, RY, RZ, CNOT. A gate's matrix treats its first
qubit as the most significant local bit.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .utils.errors import ConfigError, DecompositionError, DimensionError, NumericalError

logger = logging.getLogger(__name__)

MAX_UNITARY_QUBITS = 12


class GateKind(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    T = "t"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CNOT = "cnot"
    SWAP = "swap"
    CONTROLLED = "controlled"
    UNITARY = "unitary"


class Polarity(str, Enum):
    ON_ONE = "one"
    ON_ZERO = "zero"


ROTATIONS = {GateKind.RX, GateKind.RY, GateKind.RZ}
SELF_INVERSE = {GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.CNOT}
NATIVE = {GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.RX, GateKind.RY,
          GateKind.RZ, GateKind.CNOT}
_ARITY = {GateKind.CNOT: 2, GateKind.SWAP: 2}

_FIXED = {
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex),
    GateKind.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]], dtype=complex)


_ROTATION_MATRIX = {GateKind.RX: rx_matrix, GateKind.RY: ry_matrix, GateKind.RZ: rz_matrix}


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``base`` is set only for CONTROLLED gates, whose qubits are
    ``(control,) + base.qubits``. ``matrix_data`` holds a custom unitary as a
    nested tuple so gates stay hashable.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None
    polarity: Polarity = Polarity.ON_ONE
    base: "Gate | None" = None
    matrix_data: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "polarity", Polarity(self.polarity))
        if len(set(self.qubits)) != len(self.qubits):
            raise ConfigError(f"Gate {kind.value} has repeated qubits {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ConfigError(f"Gate {kind.value} has negative qubit index {self.qubits}")
        if (kind in ROTATIONS) != (self.angle is not None):
            raise ConfigError(f"Gate {kind.value} angle mismatch: angle={self.angle}")
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle))
        if (kind == GateKind.CONTROLLED) != (self.base is not None):
            raise ConfigError(f"Only controlled gates carry a base gate, got {kind.value}")
        if kind == GateKind.CONTROLLED and self.qubits[1:] != self.base.qubits:
            raise ConfigError(f"Controlled gate qubits {self.qubits} do not extend {self.base.qubits}")
        expected = self.arity
        if len(self.qubits) != expected:
            raise ConfigError(f"Gate {kind.value} acts on {expected} qubits, got {self.qubits}")
        if kind == GateKind.UNITARY:
            mat = self.unitary
            if not np.allclose(mat.conj().T @ mat, np.eye(mat.shape[0]), atol=1e-10):
                raise NumericalError("Custom gate matrix is not unitary", details={"qubits": self.qubits})

    @property
    def arity(self) -> int:
        if self.kind == GateKind.CONTROLLED:
            return 1 + self.base.arity
        if self.kind == GateKind.UNITARY:
            dim = len(self.matrix_data)
            k = dim.bit_length() - 1
            if dim < 2 or 2 ** k != dim:
                raise ConfigError(f"Custom gate dimension {dim} is not a power of two")
            return k
        return _ARITY.get(self.kind, 1)

    @property
    def unitary(self) -> np.ndarray:
        return np.array(self.matrix_data, dtype=complex)

    @property
    def is_native(self) -> bool:
        return self.kind in NATIVE

    def matrix(self) -> np.ndarray:
        """Dense matrix over ``self.qubits`` (first qubit most significant)."""
        if self.kind in _FIXED:
            return _FIXED[self.kind]
        if self.kind in ROTATIONS:
            return _ROTATION_MATRIX[self.kind](self.angle)
        if self.kind == GateKind.UNITARY:
            return self.unitary
        inner = self.base.matrix()
        eye = np.eye(inner.shape[0], dtype=complex)
        blocks = (eye, inner) if self.polarity == Polarity.ON_ONE else (inner, eye)
        return scipy.linalg.block_diag(*blocks)

    def controlled(self, control: int, polarity: Polarity = Polarity.ON_ONE) -> "Gate":
        """This gate conditioned on ``control``; a controlled X is returned as CNOT."""
        polarity = Polarity(polarity)
        if control in self.qubits:
            raise ConfigError(f"Control {control} collides with gate qubits {self.qubits}")
        if self.kind == GateKind.X and polarity == Polarity.ON_ONE:
            return cnot(control, self.qubits[0])
        return Gate(GateKind.CONTROLLED, (control,) + self.qubits, polarity=polarity, base=self)

    def remap(self, mapping: dict[int, int] | Sequence[int]) -> "Gate":
        qubits = tuple(mapping[q] for q in self.qubits)
        base = self.base.remap(mapping) if self.base is not None else None
        return Gate(self.kind, qubits, self.angle, self.polarity, base, self.matrix_data)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value, "qubits": list(self.qubits)}
        if self.angle is not None:
            out["angle"] = self.angle
        if self.kind == GateKind.CONTROLLED:
            out["polarity"] = self.polarity.value
            out["base"] = self.base.to_json()
        if self.kind == GateKind.UNITARY:
            out["matrix"] = [[[z.real, z.imag] for z in row] for row in self.unitary]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Gate":
        try:
            kind = GateKind(str(data["kind"]).lower())
            qubits = tuple(data["qubits"])
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"Malformed gate: {data}") from e
        if kind == GateKind.CONTROLLED:
            base = cls.from_json(data["base"])
            return Gate(kind, qubits, polarity=data.get("polarity", "one"), base=base)
        if kind == GateKind.UNITARY:
            return unitary(qubits, [[complex(re, im) for re, im in row] for row in data["matrix"]])
        return Gate(kind, qubits, data.get("angle"))


# --- Gate constructors ------------------------------------------------------

def x(q: int) -> Gate:
    return Gate(GateKind.X, (q,))


def y(q: int) -> Gate:
    return Gate(GateKind.Y, (q,))


def z(q: int) -> Gate:
    return Gate(GateKind.Z, (q,))


def h(q: int) -> Gate:
    return Gate(GateKind.H, (q,))


def s(q: int) -> Gate:
    return Gate(GateKind.S, (q,))


def t(q: int) -> Gate:
    return Gate(GateKind.T, (q,))


def rx(q: int, theta: float) -> Gate:
    return Gate(GateKind.RX, (q,), theta)


def ry(q: int, theta: float) -> Gate:
    return Gate(GateKind.RY, (q,), theta)


def rz(q: int, theta: float) -> Gate:
    return Gate(GateKind.RZ, (q,), theta)


def cnot(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (control, target))


def swap(a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b))


def toffoli(c1: int, c2: int, target: int) -> Gate:
    return cnot(c2, target).controlled(c1)


def unitary(qubits: Sequence[int], matrix) -> Gate:
    mat = np.asarray(matrix, dtype=complex)
    data = tuple(tuple(complex(v) for v in row) for row in mat)
    return Gate(GateKind.UNITARY, tuple(qubits), matrix_data=data)


# --- Circuits ---------------------------------------------------------------


@dataclass(frozen=True)
class GateCounts:
    """Native gate tallies; depth counts dependency layers."""

    cnot: int = 0
    single_qubit: int = 0
    depth: int = 0


@dataclass(frozen=True)
class Circuit:
    """Ordered gates over ``n_qubits`` qubits."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 0:
            raise ConfigError(f"Negative register size {self.n_qubits}")
        for gate in self.gates:
            if any(q >= self.n_qubits for q in gate.qubits):
                raise ConfigError(
                    f"Gate {gate.kind.value} on {gate.qubits} outside a {self.n_qubits}-qubit register"
                )

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.n_qubits, other.n_qubits), self.gates + other.gates)

    def then(self, *gates: Gate) -> "Circuit":
        return Circuit(self.n_qubits, self.gates + gates)

    def widen(self, n_qubits: int) -> "Circuit":
        return Circuit(max(n_qubits, self.n_qubits), self.gates)

    def remap(self, mapping: dict[int, int] | Sequence[int], n_qubits: int | None = None) -> "Circuit":
        """Relabel qubit q as mapping[q]."""
        size = n_qubits if n_qubits is not None else self.n_qubits
        return Circuit(size, tuple(g.remap(mapping) for g in self.gates))

    @property
    def is_native(self) -> bool:
        return all(g.is_native for g in self.gates)

    @property
    def active_qubits(self) -> set[int]:
        return {q for g in self.gates for q in g.qubits}

    def to_json(self) -> dict:
        return {"n": self.n_qubits, "gates": [g.to_json() for g in self.gates]}

    @classmethod
    def from_json(cls, data: dict) -> "Circuit":
        if not isinstance(data, dict) or "n" not in data:
            raise ConfigError("Circuit JSON needs an 'n' field")
        return cls(int(data["n"]), tuple(Gate.from_json(g) for g in data.get("gates", [])))


# --- Dense kernels ----------------------------------------------------------


def apply_matrix(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a k-qubit matrix into ``tensor`` along ``axes`` (each of size 2)."""
    k = len(axes)
    op = matrix.reshape([2] * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Dense unitary of the ordered gate product.

    Raises:
        DimensionError: For registers above 12 qubits
    """
    n = circuit.n_qubits
    if n > MAX_UNITARY_QUBITS:
        raise DimensionError(f"unitary_of supports at most {MAX_UNITARY_QUBITS} qubits, got {n}")
    dim = 2 ** n
    tensor = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    for gate in circuit.gates:
        tensor = apply_matrix(tensor, gate.matrix(), gate.qubits)
    return tensor.reshape(dim, dim)


def _local_unitary(gates: Sequence[Gate], qubits: Sequence[int]) -> np.ndarray:
    mapping = {q: i for i, q in enumerate(qubits)}
    return unitary_of(Circuit(len(qubits), tuple(g.remap(mapping) for g in gates)))


def global_phase_between(a: np.ndarray, b: np.ndarray) -> float:
    """Phase phi with a ~= exp(i phi) b, from the Hilbert-Schmidt overlap."""
    return cmath.phase(np.trace(b.conj().T @ a))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    overlap = abs(np.trace(a.conj().T @ b)) / a.shape[0]
    return abs(1 - overlap) <= atol and np.allclose(
        a, cmath.exp(1j * global_phase_between(a, b)) * b, atol=atol * 10
    )


# --- Lowering to the native set ---------------------------------------------


def zyz_angles(matrix: np.ndarray) -> tuple[float, float, float, float]:
    """(alpha, beta, gamma, delta) with U = exp(i alpha) Rz(beta) Ry(gamma) Rz(delta)."""
    det = np.linalg.det(matrix)
    alpha = cmath.phase(det) / 2
    v = matrix * cmath.exp(-1j * alpha)
    gamma = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    total = 2 * cmath.phase(v[1, 1]) if abs(v[1, 1]) > 1e-12 else 0.0
    diff = 2 * cmath.phase(v[1, 0]) if abs(v[1, 0]) > 1e-12 else 0.0
    return alpha, (total + diff) / 2, gamma, (total - diff) / 2


def _single_qubit_native(q: int, matrix: np.ndarray) -> tuple[Gate, ...]:
    _, beta, gamma, delta = zyz_angles(matrix)
    return (rz(q, delta), ry(q, gamma), rz(q, beta))


def _controlled_rotation(c: int, target: int, kind: GateKind, theta: float) -> tuple[Gate, ...]:
    if kind == GateKind.RX:
        return (h(target),) + _controlled_rotation(c, target, GateKind.RZ, theta) + (h(target),)
    half = Gate(kind, (target,), theta / 2)
    back = Gate(kind, (target,), -theta / 2)
    return (half, cnot(c, target), back, cnot(c, target))


def _toffoli_network(c1: int, c2: int, target: int) -> tuple[Gate, ...]:
    """Six-CNOT Toffoli with T gates as Rz(pi/4); equal up to global phase."""
    q = math.pi / 4
    return (
        h(target), cnot(c2, target), rz(target, -q), cnot(c1, target), rz(target, q),
        cnot(c2, target), rz(target, -q), cnot(c1, target), rz(c2, q), rz(target, q),
        h(target), cnot(c1, c2), rz(c1, q), rz(c2, -q), cnot(c1, c2),
    )


def _controlled_single(c: int, target: int, matrix: np.ndarray) -> tuple[Gate, ...]:
    """Exact controlled-U from the ZYZ form, phase kicked onto the control."""
    alpha, beta, gamma, delta = zyz_angles(matrix)
    gates = (
        rz(target, (delta - beta) / 2),
        cnot(c, target),
        rz(target, -(delta + beta) / 2), ry(target, -gamma / 2),
        cnot(c, target),
        ry(target, gamma / 2), rz(target, beta),
    )
    if abs(alpha) > 1e-15:
        gates += (rz(c, alpha),)
    return gates


def _controlled_native(c: int, gate: Gate) -> tuple[Gate, ...]:
    """Controlled version of one native gate, exact up to global phase."""
    target = gate.qubits[-1]
    if gate.kind == GateKind.X:
        return (cnot(c, target),)
    if gate.kind == GateKind.Y:
        return (rz(target, -math.pi / 2), cnot(c, target), rz(target, math.pi / 2))
    if gate.kind == GateKind.Z:
        return (h(target), cnot(c, target), h(target))
    if gate.kind in ROTATIONS:
        return _controlled_rotation(c, target, gate.kind, gate.angle)
    if gate.kind == GateKind.CNOT:
        return _toffoli_network(c, gate.qubits[0], target)
    return _controlled_single(c, target, gate.matrix())


def _multiplexed(select: int, target: int, when_zero: np.ndarray, when_one: np.ndarray) -> tuple[Gate, ...]:
    """Apply ``when_zero`` or ``when_one`` to ``target`` depending on ``select``."""
    return (
        unitary((target,), when_zero),
        unitary((target,), when_one @ when_zero.conj().T).controlled(select),
    )


def _two_qubit_native(gate: Gate) -> tuple[Gate, ...]:
    """Cosine-sine split of a 2-qubit unitary into multiplexed single-qubit gates."""
    q0, q1 = gate.qubits
    (u1, u2), theta, (v1h, v2h) = scipy.linalg.cossin(gate.unitary, p=2, q=2, separate=True)
    a = float(theta[0] + theta[1])
    b = float(theta[0] - theta[1])
    right = _multiplexed(q0, q1, v1h, v2h)
    middle = (ry(q0, a), cnot(q1, q0), ry(q0, b), cnot(q1, q0))
    left = _multiplexed(q0, q1, u1, u2)
    out: list[Gate] = []
    for part in right + middle + left:
        out.extend(_lower(part))
    return tuple(out)


@lru_cache(maxsize=65536)
def _lower(gate: Gate) -> tuple[Gate, ...]:
    if gate.is_native:
        return (gate,)
    if gate.kind == GateKind.S:
        return (rz(gate.qubits[0], math.pi / 2),)
    if gate.kind == GateKind.T:
        return (rz(gate.qubits[0], math.pi / 4),)
    if gate.kind == GateKind.SWAP:
        a, b = gate.qubits
        return (cnot(a, b), cnot(b, a), cnot(a, b))
    if gate.kind == GateKind.UNITARY:
        if len(gate.qubits) == 1:
            return _single_qubit_native(gate.qubits[0], gate.unitary)
        if len(gate.qubits) == 2:
            return _two_qubit_native(gate)
        raise DecompositionError(
            f"No decomposition registered for a {len(gate.qubits)}-qubit custom unitary",
            details={"qubits": gate.qubits},
        )

    control = gate.qubits[0]
    if gate.polarity == Polarity.ON_ZERO:
        flipped = Gate(GateKind.CONTROLLED, gate.qubits, base=gate.base)
        return (x(control),) + _lower(flipped) + (x(control),)

    base = gate.base
    inner = _lower(base)
    phase = global_phase_between(base.matrix(), _local_unitary(inner, base.qubits))
    out: list[Gate] = []
    if abs(phase) > 1e-13:
        out.append(rz(control, phase))
    for g in inner:
        out.extend(_controlled_native(control, g))
    return tuple(out)


def decompose_native(circuit: Circuit) -> Circuit:
    """Lower every gate to {X, Y, Z, H, RX, RY, RZ, CNOT}, exact up to global phase.

    Raises:
        DecompositionError: For custom unitaries on more than two qubits
    """
    if circuit.is_native:
        return circuit
    gates: list[Gate] = []
    for gate in circuit.gates:
        gates.extend(_lower(gate))
    logger.debug(f"Lowered {len(circuit.gates)} gates to {len(gates)} native gates")
    return Circuit(circuit.n_qubits, tuple(gates))


def control_wrap(circuit: Circuit, control: int, polarity: Polarity = Polarity.ON_ONE) -> Circuit:
    """Condition every gate on ``control``; on-zero control is X-conjugated.

    Raises:
        ConfigError: If ``control`` is already used by the circuit
    """
    polarity = Polarity(polarity)
    if control in circuit.active_qubits:
        raise ConfigError(f"Control qubit {control} collides with circuit qubits")
    size = max(circuit.n_qubits, control + 1)
    wrapped = tuple(g.controlled(control) for g in circuit.gates)
    if polarity == Polarity.ON_ZERO and wrapped:
        wrapped = (x(control),) + wrapped + (x(control),)
    return Circuit(size, wrapped)


# --- Peephole simplification ------------------------------------------------


def canonical_angle(theta: float) -> float:
    """Reduce modulo 4 pi into (-2 pi, 2 pi]."""
    a = math.fmod(theta, 4 * math.pi)
    if a > 2 * math.pi:
        a -= 4 * math.pi
    elif a <= -2 * math.pi:
        a += 4 * math.pi
    return a


def _peephole(gates: Iterable[Gate], atol: float) -> list[Gate]:
    out: list[Gate | None] = []
    last: dict[int, int] = {}

    def previous(gate: Gate) -> int | None:
        indices = [last[q] for q in gate.qubits if q in last]
        return max(indices) if indices else None

    def forget(index: int):
        gone = out[index]
        out[index] = None
        for q in gone.qubits:
            earlier = [i for i in range(index - 1, -1, -1)
                       if out[i] is not None and q in out[i].qubits]
            if earlier:
                last[q] = earlier[0]
            else:
                last.pop(q, None)

    for gate in gates:
        if gate.kind in ROTATIONS:
            gate = Gate(gate.kind, gate.qubits, canonical_angle(gate.angle))
            if abs(gate.angle) < atol:
                continue
        j = previous(gate)
        prior = out[j] if j is not None else None
        if prior is not None and prior.qubits == gate.qubits:
            if gate.kind in SELF_INVERSE and prior.kind == gate.kind:
                forget(j)
                continue
            if gate.kind in ROTATIONS and prior.kind == gate.kind:
                merged = canonical_angle(prior.angle + gate.angle)
                forget(j)
                if abs(merged) >= atol:
                    out.append(Gate(gate.kind, gate.qubits, merged))
                    for q in gate.qubits:
                        last[q] = len(out) - 1
                continue
        out.append(gate)
        for q in gate.qubits:
            last[q] = len(out) - 1
    return [g for g in out if g is not None]


def simplify(circuit: Circuit, atol: float = 1e-12) -> Circuit:
    """Cancel adjacent self-inverse pairs, merge same-axis rotations, drop null rotations.

    Repeats until nothing changes, so the result is a fixed point. Non-native
    gates pass through untouched and block merging across them.
    """
    gates = list(circuit.gates)
    while True:
        reduced = _peephole(gates, atol)
        if reduced == gates:
            break
        gates = reduced
    return Circuit(circuit.n_qubits, tuple(gates))


def fold_cnots(circuit: Circuit, k: int) -> Circuit:
    """Replace each CNOT by 2k+1 copies after lowering to the native set."""
    if k < 0:
        raise ConfigError(f"Folding factor must be non-negative, got k={k}")
    native = decompose_native(circuit)
    if k == 0:
        return native
    gates: list[Gate] = []
    for gate in native.gates:
        gates.extend([gate] * (2 * k + 1) if gate.kind == GateKind.CNOT else [gate])
    return Circuit(native.n_qubits, tuple(gates))


def counts(circuit: Circuit) -> GateCounts:
    """CNOT count, single-qubit count and dependency depth over the native set."""
    native = decompose_native(circuit)
    level: dict[int, int] = {}
    cx = single = depth = 0
    for gate in native.gates:
        if gate.kind == GateKind.CNOT:
            cx += 1
        else:
            single += 1
        layer = 1 + max((level.get(q, 0) for q in gate.qubits), default=0)
        for q in gate.qubits:
            level[q] = layer
        depth = max(depth, layer)
    return GateCounts(cnot=cx, single_qubit=single, depth=depth)
