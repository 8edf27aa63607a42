"""Pauli strings, real-weighted Pauli sums and the spin observables built from them.

A Pauli string stores X and Z bitmasks aligned with basis indices (qubit 0 is
the most significant bit), so P|b> = i^{|x&z|} (-1)^{|b&z|} |b ^ x>.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit, h, rx
from .simulator import DensityMatrix, State, StateVector, distribution, sample_distribution
from .utils.errors import ConfigError, DimensionError
from .utils.seeding import derive_seed

logger = logging.getLogger(__name__)

LETTERS = "IXYZ"
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def parity(values: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values)
    v = values.copy()
    while v.any():
        out ^= v & 1
        v >>= 1
    return out


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of I/X/Y/Z over ``n`` qubits as x/z bitmasks."""

    n: int
    x: int = 0
    z: int = 0

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        label = label.strip().upper()
        if any(c not in LETTERS for c in label):
            raise ConfigError(f"Invalid Pauli label {label!r}")
        n = len(label)
        x = z = 0
        for q, letter in enumerate(label):
            bx, bz = _BITS[letter]
            bit = 1 << (n - 1 - q)
            x |= bit * bx
            z |= bit * bz
        return cls(n, x, z)

    @classmethod
    def on(cls, n: int, letters: dict[int, str]) -> "PauliString":
        """String with the given letter on each listed qubit, identity elsewhere."""
        label = ["I"] * n
        for q, letter in letters.items():
            label[q] = letter
        return cls.from_label("".join(label))

    def letter(self, q: int) -> str:
        bit = 1 << (self.n - 1 - q)
        return {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}[(bool(self.x & bit), bool(self.z & bit))]

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def support(self) -> int:
        return self.x | self.z

    def _phases(self) -> np.ndarray:
        idx = np.arange(2 ** self.n)
        sign = 1 - 2 * parity(idx & self.z)
        return (1j) ** ((self.x & self.z).bit_count()) * sign

    def to_matrix(self) -> np.ndarray:
        dim = 2 ** self.n
        idx = np.arange(dim)
        mat = np.zeros((dim, dim), dtype=complex)
        mat[idx ^ self.x, idx] = self._phases()
        return mat

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        idx = np.arange(2 ** self.n)
        out = np.empty_like(amplitudes, dtype=complex)
        out[idx ^ self.x] = self._phases() * amplitudes
        return out

    def expectation(self, state: State | np.ndarray) -> float:
        """Real part of <P> on a state vector or density matrix."""
        idx = np.arange(2 ** self.n)
        if isinstance(state, DensityMatrix) or (isinstance(state, np.ndarray) and state.ndim == 2):
            rho = state.matrix if isinstance(state, DensityMatrix) else state
            _check_dim(rho.shape[0], self.n)
            return float(np.real(np.sum(self._phases() * rho[idx, idx ^ self.x])))
        psi = state.amplitudes if isinstance(state, StateVector) else np.asarray(state).reshape(-1)
        _check_dim(psi.size, self.n)
        return float(np.real(np.vdot(psi[idx ^ self.x], self._phases() * psi)))

    def qubitwise_commutes(self, other: "PauliString") -> bool:
        return all(
            a == "I" or b == "I" or a == b
            for a, b in zip(self.label, other.label)
        )

    def __str__(self) -> str:
        return self.label


def _check_dim(dim: int, n: int):
    if dim != 2 ** n:
        raise DimensionError(f"Observable on {n} qubits applied to a state of dimension {dim}")


Term = tuple[float, PauliString]


@dataclass(frozen=True)
class ObservableSum:
    """Real-weighted sum of Pauli strings with merged duplicates."""

    n: int
    terms: tuple[Term, ...] = ()

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Term], atol: float = 1e-15) -> "ObservableSum":
        merged: dict[PauliString, float] = {}
        for coeff, pauli in terms:
            if pauli.n != n:
                raise DimensionError(f"Pauli string {pauli} does not act on {n} qubits")
            merged[pauli] = merged.get(pauli, 0.0) + float(coeff)
        return cls(n, tuple((c, p) for p, c in merged.items() if abs(c) >= atol))

    def __add__(self, other: "ObservableSum") -> "ObservableSum":
        if other.n != self.n:
            raise DimensionError(f"Cannot add observables on {self.n} and {other.n} qubits")
        return ObservableSum.from_terms(self.n, self.terms + other.terms)

    def __mul__(self, scale: float) -> "ObservableSum":
        return ObservableSum.from_terms(self.n, ((scale * c, p) for c, p in self.terms))

    __rmul__ = __mul__

    @cached_property
    def matrix(self) -> np.ndarray:
        dim = 2 ** self.n
        out = np.zeros((dim, dim), dtype=complex)
        for coeff, pauli in self.terms:
            out += coeff * pauli.to_matrix()
        return out

    def to_json(self) -> list[dict]:
        return [{"coeff": c, "pauli": p.label} for c, p in self.terms]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> "ObservableSum":
        try:
            terms = [(float(t["coeff"]), PauliString.from_label(t["pauli"])) for t in data]
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed observable JSON: {e}") from e
        if not terms:
            raise ConfigError("Observable JSON has no terms")
        return cls.from_terms(terms[0][1].n, terms)


def identity(n: int, coeff: float = 1.0) -> ObservableSum:
    return ObservableSum.from_terms(n, [(coeff, PauliString(n))])


def total_sz(n: int) -> ObservableSum:
    """Sum of Z_i / 2; |0> carries m = +1/2."""
    if n < 1:
        raise DimensionError(f"Need at least one qubit, got n={n}")
    return ObservableSum.from_terms(n, [(0.5, PauliString.on(n, {q: "Z"})) for q in range(n)])


def _dot_terms(n: int, i: int, j: int, weight: float) -> list[Term]:
    return [(weight, PauliString.on(n, {i: a, j: a})) for a in "XYZ"]


def subset_s2(n: int, subset: Iterable[int]) -> ObservableSum:
    """Squared total spin of the qubits in ``subset``.

    Raises:
        ConfigError: For an empty subset or out-of-range qubits
    """
    qubits = sorted(set(subset))
    if not qubits:
        raise ConfigError("subset_s2 needs a nonempty subset")
    if qubits[0] < 0 or qubits[-1] >= n:
        raise ConfigError(f"Subset {qubits} outside 0..{n - 1}")
    terms: list[Term] = [(0.75 * len(qubits), PauliString(n))]
    for i, j in combinations(qubits, 2):
        terms.extend(_dot_terms(n, i, j, 0.5))
    return ObservableSum.from_terms(n, terms)


def total_s2(n: int) -> ObservableSum:
    return subset_s2(n, range(n))


def heisenberg(n: int, edges: Iterable[tuple[int, int]]) -> ObservableSum:
    """Sum over edges of S_i . S_j = (XX + YY + ZZ) / 4."""
    terms: list[Term] = []
    for i, j in edges:
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ConfigError(f"Invalid edge ({i}, {j}) on {n} qubits")
        terms.extend(_dot_terms(n, min(i, j), max(i, j), 0.25))
    return ObservableSum.from_terms(n, terms)


CHAIN3_EDGES = ((0, 1), (0, 2), (1, 2))
BOWTIE5_EDGES = ((0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4))


def expectation(obs: ObservableSum, state: State | np.ndarray) -> float:
    """Sum of c_k <P_k>, accumulated in term order."""
    return math.fsum(c * p.expectation(state) for c, p in obs.terms)


# --- Measurement settings ---------------------------------------------------


@dataclass(frozen=True)
class MeasurementSetting:
    """One local basis per qubit and the terms read out from it."""

    basis: str
    terms: tuple[Term, ...]

    @property
    def n(self) -> int:
        return len(self.basis)

    def basis_change(self) -> Circuit:
        """Rotate so a Z measurement reads the requested basis: H for X, Rx(pi/2) for Y."""
        gates = []
        for q, letter in enumerate(self.basis):
            if letter == "X":
                gates.append(h(q))
            elif letter == "Y":
                gates.append(rx(q, math.pi / 2))
        return Circuit(self.n, tuple(gates))

    def outcome_values(self) -> np.ndarray:
        """Value of the grouped terms on each measured bitstring."""
        idx = np.arange(2 ** self.n)
        values = np.zeros(idx.size)
        for coeff, pauli in self.terms:
            values += coeff * (1 - 2 * parity(idx & pauli.support))
        return values

    def estimate(self, probs: np.ndarray) -> float:
        return float(np.dot(probs, self.outcome_values()))


def grouping(obs: ObservableSum) -> list[MeasurementSetting]:
    """Greedy first-fit partition into qubit-wise commuting groups, in term order."""
    n = obs.n
    bases: list[list[str | None]] = []
    members: list[list[Term]] = []
    identity_terms: list[Term] = []
    for coeff, pauli in obs.terms:
        if pauli.is_identity:
            identity_terms.append((coeff, pauli))
            continue
        letters = pauli.label
        for basis, group in zip(bases, members):
            if all(l == "I" or b is None or b == l for l, b in zip(letters, basis)):
                for q, l in enumerate(letters):
                    if l != "I":
                        basis[q] = l
                group.append((coeff, pauli))
                break
        else:
            bases.append([l if l != "I" else None for l in letters])
            members.append([(coeff, pauli)])
    if not members:
        bases.append([None] * n)
        members.append([])
    members[0] = identity_terms + members[0]
    return [
        MeasurementSetting("".join(b or "Z" for b in basis), tuple(group))
        for basis, group in zip(bases, members)
    ]


def sampled_expectation(
    obs: ObservableSum,
    state: State,
    shots: int,
    seed: int,
    noise=None,
) -> float:
    """Shot estimate using one seeded sample per measurement setting."""
    total = 0.0
    for setting in grouping(obs):
        probs = distribution(state, setting.basis_change(), noise)
        result = sample_distribution(probs, obs.n, shots, derive_seed(seed, "setting", setting.basis))
        total += setting.estimate(result.probabilities(obs.n))
    return total


def estimator_variance(obs: ObservableSum, state: State, shots: int) -> float:
    """Variance of ``sampled_expectation`` for ideal readout."""
    var = 0.0
    for setting in grouping(obs):
        probs = distribution(state, setting.basis_change())
        values = setting.outcome_values()
        mean = float(np.dot(probs, values))
        var += (float(np.dot(probs, values ** 2)) - mean ** 2) / shots
    return var
