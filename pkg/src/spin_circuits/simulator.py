"""Dense statevector and density-matrix simulation with seeded sampling.

Noisy runs lower the circuit to the native set and follow every gate with a
local depolarizing channel. Readout error is classical and applied only when
outcome distributions are formed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .circuit import Circuit, GateKind, apply_matrix, decompose_native
from .models.simulation import NoiseModel, ShotResult
from .spin import basis_string
from .utils.errors import ConfigError, DimensionError

logger = logging.getLogger(__name__)

MAX_STATEVECTOR_QUBITS = 12
MAX_DENSITY_QUBITS = 6


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes over 2^n basis states."""

    n: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** self.n:
            raise DimensionError(f"Expected {2 ** self.n} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-10:
            raise DimensionError(f"State vector norm {norm} differs from 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if 2 ** n != amps.size:
            raise DimensionError(f"Amplitude count {amps.size} is not a power of two")
        return cls(n, amps / np.linalg.norm(amps))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.n, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian unit-trace matrix over 2^n basis states."""

    n: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        dim = 2 ** self.n
        if mat.shape != (dim, dim):
            raise DimensionError(f"Expected a {dim}x{dim} density matrix, got {mat.shape}")
        if not np.allclose(mat, mat.conj().T, atol=1e-10):
            raise DimensionError("Density matrix is not Hermitian")
        if abs(np.trace(mat) - 1) > 1e-10:
            raise DimensionError(f"Density matrix trace {np.trace(mat).real} differs from 1")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(n, np.eye(2 ** n, dtype=complex) / 2 ** n)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


State = Union[StateVector, DensityMatrix]


def run_statevector(circuit: Circuit) -> StateVector:
    """Noiseless amplitudes of circuit|0...0>.

    Raises:
        DimensionError: For registers above 12 qubits
    """
    n = circuit.n_qubits
    if n > MAX_STATEVECTOR_QUBITS:
        raise DimensionError(f"Statevector simulation supports at most {MAX_STATEVECTOR_QUBITS} qubits, got {n}")
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1.0
    return StateVector(n, evolve_vector(psi, circuit))


def evolve_vector(amplitudes: np.ndarray, circuit: Circuit) -> np.ndarray:
    n = circuit.n_qubits
    tensor = amplitudes.reshape([2] * n) if n else amplitudes
    for gate in circuit.gates:
        tensor = apply_matrix(tensor, gate.matrix(), gate.qubits)
    return tensor.reshape(-1)


def _apply_unitary_density(tensor: np.ndarray, matrix: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    tensor = apply_matrix(tensor, matrix, qubits)
    return apply_matrix(tensor, matrix.conj(), [n + q for q in qubits])


def _depolarize(tensor: np.ndarray, qubits: Sequence[int], p: float, n: int) -> np.ndarray:
    """(1 - p) rho + p Tr_Q(rho) (x) I_Q / 2^k on the qubits Q."""
    if p == 0.0:
        return tensor
    k = len(qubits)
    sub = [*qubits, *(n + q for q in qubits)]
    tail = list(range(2 * n - 2 * k, 2 * n))
    moved = np.moveaxis(tensor, sub, tail)
    rest_shape = moved.shape[: 2 * n - 2 * k]
    dq = 2 ** k
    block = moved.reshape(-1, dq, dq)
    reduced = np.trace(block, axis1=1, axis2=2)
    mixed = reduced[:, None, None] * (np.eye(dq) / dq)[None, :, :]
    out = ((1 - p) * block + p * mixed).reshape(*rest_shape, *([2] * (2 * k)))
    return np.moveaxis(out, tail, sub)


def run_density(circuit: Circuit, noise: NoiseModel | None = None) -> DensityMatrix:
    """Density matrix of the circuit under depolarizing-after-gate noise.

    Raises:
        DimensionError: For registers above 6 qubits
    """
    noise = noise or NoiseModel.noiseless()
    n = circuit.n_qubits
    if n > MAX_DENSITY_QUBITS:
        raise DimensionError(f"Density simulation supports at most {MAX_DENSITY_QUBITS} qubits, got {n}")
    native = decompose_native(circuit)
    dim = 2 ** n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    tensor = rho.reshape([2] * (2 * n))
    for gate in native.gates:
        tensor = _apply_unitary_density(tensor, gate.matrix(), gate.qubits, n)
        p = noise.p2 if gate.kind == GateKind.CNOT else noise.p1
        tensor = _depolarize(tensor, gate.qubits, p, n)
    logger.debug(f"Density run: {len(native.gates)} native gates, p1={noise.p1}, p2={noise.p2}")
    mat = tensor.reshape(dim, dim)
    return DensityMatrix(n, (mat + mat.conj().T) / 2)


def depolarize(rho: DensityMatrix, qubits: Sequence[int], p: float) -> DensityMatrix:
    """Apply the local depolarizing channel to an existing density matrix."""
    n = rho.n
    tensor = _depolarize(rho.matrix.reshape([2] * (2 * n)), list(qubits), p, n)
    return DensityMatrix(n, tensor.reshape(2 ** n, 2 ** n))


def evolve(state: State, circuit: Circuit) -> State:
    """Apply a noiseless circuit to an existing state."""
    if circuit.n_qubits != state.n:
        raise DimensionError(f"Circuit on {circuit.n_qubits} qubits applied to a {state.n}-qubit state")
    if isinstance(state, StateVector):
        return StateVector(state.n, evolve_vector(state.amplitudes, circuit))
    n = state.n
    tensor = state.matrix.reshape([2] * (2 * n))
    for gate in circuit.gates:
        tensor = _apply_unitary_density(tensor, gate.matrix(), gate.qubits, n)
    return DensityMatrix(n, tensor.reshape(2 ** n, 2 ** n))


def born_probabilities(state: State) -> np.ndarray:
    if isinstance(state, StateVector):
        probs = np.abs(state.amplitudes) ** 2
    else:
        probs = np.real(np.diag(state.matrix)).copy()
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def apply_readout(probs: np.ndarray, n: int, noise: NoiseModel | None) -> np.ndarray:
    """Push a distribution through each qubit's confusion matrix."""
    if noise is None or noise.has_perfect_readout:
        return probs
    tensor = probs.reshape([2] * n)
    for q in range(n):
        tensor = apply_matrix(tensor, noise.readout_matrix(q), [q])
    return tensor.reshape(-1)


def distribution(state: State, basis_change: Circuit | None = None, noise: NoiseModel | None = None) -> np.ndarray:
    """Exact outcome distribution after a basis change and readout error."""
    if basis_change is not None and basis_change.gates:
        state = evolve(state, basis_change)
    return apply_readout(born_probabilities(state), state.n, noise)


def rng_for(seed: int) -> np.random.Generator:
    """Counter-based generator; equal seeds give identical streams."""
    return np.random.Generator(np.random.Philox(seed))


def sample_distribution(probs: np.ndarray, n: int, shots: int, seed: int) -> ShotResult:
    probs = np.clip(probs, 0.0, None)
    draws = rng_for(seed).multinomial(shots, probs / probs.sum())
    counts = {basis_string(i, n): int(c) for i, c in enumerate(draws) if c}
    return ShotResult(seed=seed, shots=shots, counts=counts)


def sample(
    state: State,
    basis_change: Circuit | None,
    shots: int,
    noise: NoiseModel | None,
    seed: int,
) -> ShotResult:
    """Draw ``shots`` multinomial samples after basis change and readout error."""
    if shots < 1:
        raise ConfigError(f"Need at least one shot, got {shots}")
    probs = distribution(state, basis_change, noise)
    return sample_distribution(probs, state.n, shots, seed)


def _as_matrix(rho: State | np.ndarray) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, StateVector):
        return np.outer(rho.amplitudes, rho.amplitudes.conj())
    return np.asarray(rho, dtype=complex)


def _as_vector(psi: StateVector | np.ndarray) -> np.ndarray:
    if isinstance(psi, StateVector):
        return psi.amplitudes
    return np.asarray(psi, dtype=complex).reshape(-1)


def fidelity(rho: State | np.ndarray, psi: StateVector | np.ndarray) -> float:
    """<psi|rho|psi> for a pure reference state."""
    mat, vec = _as_matrix(rho), _as_vector(psi)
    if mat.shape[0] != vec.size:
        raise DimensionError(f"Fidelity between dimension {mat.shape[0]} and {vec.size}")
    return float(np.real(vec.conj() @ mat @ vec))


def purity(rho: State | np.ndarray) -> float:
    """Tr(rho^2)."""
    mat = _as_matrix(rho)
    return float(np.real(np.sum(mat * mat.T)))


def overlap(a: StateVector | np.ndarray, b: StateVector | np.ndarray) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    va, vb = _as_vector(a), _as_vector(b)
    if va.size != vb.size:
        raise DimensionError(f"Overlap between dimension {va.size} and {vb.size}")
    return float(abs(np.vdot(va, vb)) ** 2)
