"""Variational preparation of spin eigenstates.

The cost penalizes the distance of <S_z>, <S^2> and any subset <S_Omega^2> from
their target eigenvalues. Every ansatz parameter enters exactly one rotation
exp(-i theta P / 2) with P a Pauli word, so gradients follow from the
parameter-shift rule.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Sequence, Union

import numpy as np
import scipy.optimize

from .circuit import Circuit, Gate, cnot, ry, rz, x
from .models.simulation import NoiseModel
from .pauli import ObservableSum, sampled_expectation, subset_s2, total_s2, total_sz
from .simulator import State, StateVector, overlap, rng_for, run_statevector
from .spin import CouplingTree, HalfInt, HalfIntLike, SpinLabel, internal_nodes, validate_tree
from .synthesis import ChainLabels, erc_chain
from .utils.errors import ConfigError, DimensionError, LabelError
from .utils.seeding import derive_seed

logger = logging.getLogger(__name__)

SHIFT = math.pi / 2
DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITERS = 500
DEFAULT_GTOL = 1e-9


# --- Cost ---------------------------------------------------------------------


@dataclass(frozen=True)
class CostSpec:
    """Target total spin ``l``, projection ``m`` and optional subset spins."""

    n: int
    l: HalfInt
    m: HalfInt
    subsets: tuple[tuple[tuple[int, ...], HalfInt], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "l", HalfInt.of(self.l))
        object.__setattr__(self, "m", HalfInt.of(self.m))
        SpinLabel(self.l, self.m)
        if self.l.twice > self.n or (self.n - self.l.twice) % 2:
            raise LabelError(f"Total spin {self.l} is impossible for {self.n} spins")
        normalized = []
        for qubits, l_k in self.subsets:
            qubits = tuple(sorted(set(int(q) for q in qubits)))
            l_k = HalfInt.of(l_k)
            if not qubits or qubits[0] < 0 or qubits[-1] >= self.n:
                raise ConfigError(f"Subset {qubits} outside 0..{self.n - 1}")
            if l_k.twice > len(qubits) or (len(qubits) - l_k.twice) % 2:
                raise LabelError(f"Spin {l_k} is impossible for subset {qubits}")
            normalized.append((qubits, l_k))
        if len({q for q, _ in normalized}) != len(normalized):
            raise ConfigError("Cost subsets must be distinct")
        object.__setattr__(self, "subsets", tuple(normalized))

    @classmethod
    def for_chain(cls, labels: ChainLabels) -> "CostSpec":
        """Prefix subsets {0,1}, {0,1,2}, ... carry the chain's intermediate spins."""
        subsets = tuple((tuple(range(k)), labels.spin_at(k)) for k in range(2, labels.n))
        return cls(labels.n, labels.l, labels.m, subsets)

    @classmethod
    def for_tree(cls, tree: CouplingTree, m: HalfIntLike) -> "CostSpec":
        validate_tree(tree)
        nodes = list(internal_nodes(tree))
        subsets = tuple((tuple(node.qubits), node.l) for node in nodes[:-1])
        return cls(len(tree.qubits), tree.l, HalfInt.of(m), subsets)

    @cached_property
    def observables(self) -> list[tuple[ObservableSum, float]]:
        """(observable, target eigenvalue) pairs in cost order."""
        out = [
            (total_sz(self.n), self.m.value),
            (total_s2(self.n), self.l.value * (self.l.value + 1)),
        ]
        for qubits, l_k in self.subsets:
            out.append((subset_s2(self.n, qubits), l_k.value * (l_k.value + 1)))
        return out

    @cached_property
    def _dense(self) -> tuple[list[np.ndarray], np.ndarray]:
        return [obs.matrix for obs, _ in self.observables], np.array([t for _, t in self.observables])


def expectation_values(spec: CostSpec, state: State) -> np.ndarray:
    """<A_j> for every observable in the cost."""
    if state.n != spec.n:
        raise DimensionError(f"Cost over {spec.n} qubits evaluated on a {state.n}-qubit state")
    matrices, _ = spec._dense
    if isinstance(state, StateVector):
        psi = state.amplitudes
        return np.array([np.real(np.vdot(psi, mat @ psi)) for mat in matrices])
    return np.array([np.real(np.sum(mat * state.matrix.T)) for mat in matrices])


def cost(spec: CostSpec, state: State) -> float:
    """Sum of squared deviations of the spin expectations from their targets."""
    _, targets = spec._dense
    return float(np.sum((expectation_values(spec, state) - targets) ** 2))


def estimate_cost(
    spec: CostSpec,
    state: State,
    shots: int,
    seed: int,
    noise: NoiseModel | None = None,
) -> float:
    """Shot-based cost; every observable gets its own derived seed."""
    total = 0.0
    for index, (obs, target) in enumerate(spec.observables):
        value = sampled_expectation(obs, state, shots, derive_seed(seed, "cost", index), noise)
        total += (value - target) ** 2
    return total


# --- Ansatze ------------------------------------------------------------------


def _check_edges(n: int, edges: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out = []
    for a, b in edges:
        if a == b or not (0 <= a < n and 0 <= b < n):
            raise ConfigError(f"Edge ({a}, {b}) is not a pair of distinct qubits in 0..{n - 1}")
        out.append((int(a), int(b)))
    return tuple(out)


def heisenberg_block(i: int, j: int, theta_x: float, theta_y: float, theta_z: float) -> list[Gate]:
    """exp(-i (theta_x XX + theta_y YY + theta_z ZZ) / 2) on (i, j) with three CNOTs, up to phase."""
    half = math.pi / 2
    return [
        rz(i, -half),
        cnot(j, i),
        rz(i, theta_z + half),
        ry(j, theta_y + half),
        cnot(i, j),
        ry(j, -theta_x - half),
        cnot(j, i),
        rz(j, half),
    ]


@dataclass(frozen=True)
class RyAnsatz:
    """Ry layer, then ``reps`` times (CNOT entangler over ``edges``, Ry layer)."""

    n: int
    reps: int = 1
    edges: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.n < 1 or self.reps < 0:
            raise ConfigError(f"RyAnsatz needs n >= 1 and reps >= 0, got n={self.n}, reps={self.reps}")
        edges = self.edges if self.edges is not None else [(q, q + 1) for q in range(self.n - 1)]
        object.__setattr__(self, "edges", _check_edges(self.n, edges))

    @property
    def n_params(self) -> int:
        return self.n * (self.reps + 1)

    def build(self, params: Sequence[float]) -> Circuit:
        params = _check_params(self, params)
        gates = [ry(q, params[q]) for q in range(self.n)]
        for r in range(1, self.reps + 1):
            gates += [cnot(a, b) for a, b in self.edges]
            gates += [ry(q, params[r * self.n + q]) for q in range(self.n)]
        return Circuit(self.n, tuple(gates))


@dataclass(frozen=True)
class TimeEvoAnsatz:
    """Trotterized coupling of the last spin to an (n-1)-spin eigenstate.

    Each repetition applies Heisenberg blocks on ``intra_edges`` (skipped in
    the first repetition) and then on ``coupling_edges``; every block carries
    its own (theta_x, theta_y, theta_z).
    """

    n: int
    reps: int = 1
    initial: Circuit | None = field(default=None, compare=False)
    intra_edges: tuple[tuple[int, int], ...] | None = None
    coupling_edges: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.n < 2 or self.reps < 1:
            raise ConfigError(f"TimeEvoAnsatz needs n >= 2 and reps >= 1, got n={self.n}, reps={self.reps}")
        intra = self.intra_edges if self.intra_edges is not None else list(combinations(range(self.n - 1), 2))
        coupling = (self.coupling_edges if self.coupling_edges is not None
                    else [(q, self.n - 1) for q in range(self.n - 1)])
        object.__setattr__(self, "intra_edges", _check_edges(self.n, intra))
        object.__setattr__(self, "coupling_edges", _check_edges(self.n, coupling))
        initial = self.initial if self.initial is not None else Circuit(self.n)
        if initial.n_qubits != self.n:
            raise DimensionError(f"Initial circuit has {initial.n_qubits} qubits, ansatz has {self.n}")
        object.__setattr__(self, "initial", initial)

    @property
    def blocks(self) -> list[tuple[int, int]]:
        out = list(self.coupling_edges)
        for _ in range(1, self.reps):
            out += list(self.intra_edges) + list(self.coupling_edges)
        return out

    @property
    def n_params(self) -> int:
        return 3 * len(self.blocks)

    def build(self, params: Sequence[float]) -> Circuit:
        params = _check_params(self, params)
        gates = list(self.initial.gates)
        for index, (i, j) in enumerate(self.blocks):
            gates += heisenberg_block(i, j, *params[3 * index: 3 * index + 3])
        return Circuit(self.n, tuple(gates))


Ansatz = Union[RyAnsatz, TimeEvoAnsatz]


def _check_params(ansatz: Ansatz, params: Sequence[float]) -> list[float]:
    values = [float(p) for p in np.asarray(params, dtype=float).reshape(-1)]
    if len(values) != ansatz.n_params:
        raise ConfigError(
            f"{type(ansatz).__name__} takes {ansatz.n_params} parameters, got {len(values)}"
        )
    return values


def build_circuit(ansatz: Ansatz, params: Sequence[float]) -> Circuit:
    return ansatz.build(params)


def initial_state_for(labels: ChainLabels) -> Circuit:
    """(n-1)-spin chain eigenstate with m - 1/2, times |0> on the last qubit.

    When m - 1/2 lies outside the (n-1)-spin multiplet the last qubit is
    flipped instead and the remaining spins carry m + 1/2.

    Raises:
        ConfigError: For single-spin targets
    """
    n = labels.n
    if n < 2:
        raise ConfigError("Initial states need at least two spins")
    l_prev = labels.spin_at(n - 1)
    rest = labels.intermediates[:-1]
    if abs((labels.m - HalfInt(1)).twice) <= l_prev.twice:
        return erc_chain(ChainLabels(rest, labels.m - HalfInt(1))).widen(n)
    return erc_chain(ChainLabels(rest, labels.m + HalfInt(1))).widen(n).then(x(n - 1))


# --- Gradient and optimization ------------------------------------------------


def _state(ansatz: Ansatz, params: Sequence[float]) -> StateVector:
    return run_statevector(ansatz.build(params))


def gradient(spec: CostSpec, ansatz: Ansatz, params: Sequence[float]) -> np.ndarray:
    """Exact cost gradient from parameter-shifted expectation values."""
    theta = np.asarray(_check_params(ansatz, params))
    _, targets = spec._dense
    residual = expectation_values(spec, _state(ansatz, theta)) - targets
    grad = np.zeros(theta.size)
    for p in range(theta.size):
        shifted = theta.copy()
        shifted[p] += SHIFT
        plus = expectation_values(spec, _state(ansatz, shifted))
        shifted[p] -= 2 * SHIFT
        minus = expectation_values(spec, _state(ansatz, shifted))
        grad[p] = float(np.dot(2 * residual, (plus - minus) / 2))
    return grad


@dataclass
class OptimizationResult:
    params: list[float]
    cost: float
    iterations: int
    trace: list[float]
    seed: int
    restart: int
    converged: bool
    fidelity: float | None = None
    state: StateVector | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "params": self.params,
            "cost": self.cost,
            "fidelity": self.fidelity,
            "iterations": self.iterations,
            "trace": self.trace,
            "seed": self.seed,
            "restart": self.restart,
            "converged": self.converged,
        }


def _run_restart(
    spec: CostSpec,
    ansatz: Ansatz,
    start: np.ndarray,
    restart: int,
    seed: int,
    max_iters: int,
    gtol: float,
) -> OptimizationResult:
    def objective(theta: np.ndarray) -> float:
        return cost(spec, _state(ansatz, theta))

    trace = [objective(start)]
    result = scipy.optimize.minimize(
        objective,
        start,
        jac=lambda theta: gradient(spec, ansatz, theta),
        method="CG",
        callback=lambda theta: trace.append(objective(theta)),
        options={"gtol": gtol, "maxiter": max_iters, "norm": np.inf},
    )
    params = [float(v) for v in result.x]
    logger.debug(f"Restart {restart}: cost={result.fun:.3e} after {result.nit} iterations ({result.message})")
    return OptimizationResult(
        params=params,
        cost=float(result.fun),
        iterations=int(result.nit),
        trace=trace,
        seed=seed,
        restart=restart,
        converged=bool(result.success),
        state=_state(ansatz, params),
    )


def starting_points(ansatz: Ansatz, seed: int, restarts: int, initial_params: Sequence[float] | None = None) -> list[np.ndarray]:
    """Uniform draws on [0, 2 pi)^d, one derived stream per restart."""
    starts = [
        rng_for(derive_seed(seed, "restart", i)).uniform(0.0, 2 * math.pi, size=ansatz.n_params)
        for i in range(restarts)
    ]
    if initial_params is not None:
        starts[0] = np.asarray(_check_params(ansatz, initial_params))
    return starts


def optimize(
    spec: CostSpec,
    ansatz: Ansatz,
    seed: int,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    gtol: float = DEFAULT_GTOL,
    target: StateVector | None = None,
    initial_params: Sequence[float] | None = None,
    workers: int = 1,
) -> OptimizationResult:
    """Conjugate-gradient minimization from seeded random starts.

    The best restart wins, ties going to the lower restart index, so the
    result depends only on ``seed`` and not on ``workers``.

    Raises:
        ConfigError: If restarts < 1
        DimensionError: If the ansatz and the cost act on different registers
    """
    if restarts < 1:
        raise ConfigError(f"Need at least one restart, got {restarts}")
    if ansatz.n != spec.n:
        raise DimensionError(f"Ansatz on {ansatz.n} qubits, cost on {spec.n}")
    starts = starting_points(ansatz, seed, restarts, initial_params)
    logger.info(
        f"Optimizing {type(ansatz).__name__} ({ansatz.n_params} parameters) for l={spec.l}, m={spec.m}: "
        f"{restarts} restarts, {workers} workers"
    )

    def run(i: int) -> OptimizationResult:
        return _run_restart(spec, ansatz, starts[i], i, seed, max_iters, gtol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(i) for i in range(restarts)]

    best = min(results, key=lambda r: (r.cost, r.restart))
    if target is not None:
        best.fidelity = overlap(best.state, target)
    logger.info(f"Best restart {best.restart}: cost={best.cost:.3e}, fidelity={best.fidelity}")
    return best
