"""Spin-1/2 coupling arithmetic.

Exact half-integer quantum numbers, Clebsch-Gordan coefficients in the
Condon-Shortley convention, coupling trees and the classical amplitudes of
total-spin eigenstates built from them. Everything else in the package uses
the states computed here as its reference.

Basis convention: qubit 0 is the leftmost character of a ket and the most
significant bit of a basis index; ``|0>`` carries m = +1/2.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Union

import numpy as np

from .utils.errors import ConfigError, DimensionError, LabelError

logger = logging.getLogger(__name__)

MAX_TWICE = 128

HalfIntLike = Union["HalfInt", int, float, str, Fraction]


@dataclass(frozen=True, order=True)
class HalfInt:
    """An exact integer or half-integer stored as twice its value."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or isinstance(self.twice, bool):
            raise LabelError(f"HalfInt needs an integer twice-value, got {self.twice!r}")
        if abs(int(self.twice)) > MAX_TWICE:
            raise LabelError(
                f"HalfInt out of range: {Fraction(int(self.twice), 2)}",
                details={"max_abs": MAX_TWICE // 2},
            )
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def of(cls, value: HalfIntLike) -> "HalfInt":
        """Coerce ints, floats, fractions and strings such as "3/2" or "-1/2"."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, bool):
            raise LabelError(f"Not a spin value: {value!r}")
        try:
            frac = Fraction(str(value).strip()) if isinstance(value, str) else Fraction(value)
        except (ValueError, ZeroDivisionError, TypeError) as e:
            raise LabelError(f"Not a spin value: {value!r}") from e
        doubled = 2 * frac
        if doubled.denominator != 1:
            raise LabelError(f"Not an integer or half-integer: {value!r}")
        return cls(int(doubled))

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __add__(self, other: HalfIntLike) -> "HalfInt":
        return HalfInt(self.twice + HalfInt.of(other).twice)

    def __sub__(self, other: HalfIntLike) -> "HalfInt":
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __abs__(self) -> "HalfInt":
        return HalfInt(abs(self.twice))

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        if self.is_integer:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def __repr__(self) -> str:
        return f"HalfInt({self})"


HALF = HalfInt(1)


@dataclass(frozen=True)
class SpinLabel:
    """A (l, m) pair with l >= 0, |m| <= l and matching parity."""

    l: HalfInt
    m: HalfInt

    def __post_init__(self):
        l, m = HalfInt.of(self.l), HalfInt.of(self.m)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "m", m)
        if l.twice < 0:
            raise LabelError(f"Negative total spin l={l}")
        if (l.twice - m.twice) % 2:
            raise LabelError(f"Parity mismatch between l={l} and m={m}")
        if abs(m.twice) > l.twice:
            raise LabelError(f"|m| exceeds l: l={l}, m={m}")

    @property
    def s2(self) -> float:
        """Eigenvalue l(l+1) of the squared spin."""
        return self.l.value * (self.l.value + 1)

    def __str__(self) -> str:
        return f"(l={self.l}, m={self.m})"


def _check_pair(l: HalfInt, m: HalfInt) -> bool:
    """Reject malformed pairs; report whether m lies inside [-l, l]."""
    if l.twice < 0:
        raise LabelError(f"Negative spin l={l}")
    if (l.twice - m.twice) % 2:
        raise LabelError(f"Parity mismatch between l={l} and m={m}")
    return abs(m.twice) <= l.twice


def triangle_ok(l1: HalfIntLike, l2: HalfIntLike, l: HalfIntLike) -> bool:
    """Triangle rule |l1 - l2| <= l <= l1 + l2 with integer step."""
    a, b, c = HalfInt.of(l1).twice, HalfInt.of(l2).twice, HalfInt.of(l).twice
    return abs(a - b) <= c <= a + b and (a + b - c) % 2 == 0


def _lowering_factor(tj: int, tm: int) -> float:
    """sqrt(j(j+1) - m(m-1)) from twice-values."""
    return math.sqrt((tj * (tj + 2) - tm * (tm - 2)) / 4)


@lru_cache(maxsize=256)
def _cg_table(tl1: int, tl2: int) -> dict[tuple[int, int, int, int], float]:
    """All coefficients <l1 m1; l2 m2 | l m> for fixed l1, l2.

    Stretched states |l, l> come from Gram-Schmidt against the higher-l states
    at the same m, seeded on the m1 = l1 product state so that coefficient is
    positive. Lower states follow from the total lowering operator.
    """
    table: dict[tuple[int, int, int, int], float] = {}
    # states[(tl, tm)] -> {(tm1, tm2): amplitude}
    states: dict[tuple[int, int], dict[tuple[int, int], float]] = {}

    for tl in range(tl1 + tl2, abs(tl1 - tl2) - 1, -2):
        seed = {(tl1, tl - tl1): 1.0}
        for higher in range(tl1 + tl2, tl, -2):
            other = states[(higher, tl)]
            overlap = sum(other.get(k, 0.0) * v for k, v in seed.items())
            for k, v in other.items():
                seed[k] = seed.get(k, 0.0) - overlap * v
        norm = math.sqrt(sum(v * v for v in seed.values()))
        vec = {k: v / norm for k, v in seed.items() if abs(v / norm) > 1e-15}
        states[(tl, tl)] = vec

        for tm in range(tl, -tl, -2):
            lowered: dict[tuple[int, int], float] = {}
            for (tm1, tm2), amp in vec.items():
                if tm1 > -tl1:
                    key = (tm1 - 2, tm2)
                    lowered[key] = lowered.get(key, 0.0) + amp * _lowering_factor(tl1, tm1)
                if tm2 > -tl2:
                    key = (tm1, tm2 - 2)
                    lowered[key] = lowered.get(key, 0.0) + amp * _lowering_factor(tl2, tm2)
            scale = _lowering_factor(tl, tm)
            vec = {k: v / scale for k, v in lowered.items() if abs(v) > 1e-15}
            states[(tl, tm - 2)] = vec

    for (tl, tm), vec in states.items():
        for (tm1, tm2), amp in vec.items():
            table[(tm1, tm2, tl, tm)] = amp
    return table


def _cg_half(tl1: int, tm2: int, tl: int, tm: int) -> float:
    """Closed forms for coupling a spin-1/2 onto l1."""
    if tl == tl1 + 1:
        num = tl1 + tm + 1 if tm2 == 1 else tl1 - tm + 1
        return math.sqrt(num / (2 * (tl1 + 1)))
    # tl == tl1 - 1
    if tm2 == 1:
        return -math.sqrt((tl1 - tm + 1) / (2 * (tl1 + 1)))
    return math.sqrt((tl1 + tm + 1) / (2 * (tl1 + 1)))


def cg_coefficient(
    l1: HalfIntLike,
    m1: HalfIntLike,
    l2: HalfIntLike,
    m2: HalfIntLike,
    l: HalfIntLike,
    m: HalfIntLike,
) -> float:
    """Clebsch-Gordan coefficient <l1 m1; l2 m2 | l m> (Condon-Shortley).

    Returns 0.0 when m != m1 + m2, when any |m| exceeds its l, or when the
    triangle rule fails.

    Raises:
        LabelError: If a spin is negative or an (l, m) pair has mismatched parity
    """
    l1, m1, l2, m2, l, m = (HalfInt.of(v) for v in (l1, m1, l2, m2, l, m))
    inside = [_check_pair(l1, m1), _check_pair(l2, m2), _check_pair(l, m)]
    if not all(inside) or m1.twice + m2.twice != m.twice or not triangle_ok(l1, l2, l):
        return 0.0
    if l2.twice == 1 and l1.twice > 0:
        return _cg_half(l1.twice, m2.twice, l.twice, m.twice)
    return _cg_table(l1.twice, l2.twice).get((m1.twice, m2.twice, l.twice, m.twice), 0.0)


def cg_matrix(l1: HalfIntLike, l2: HalfIntLike) -> np.ndarray:
    """Coupling matrix C[(m1, m2), (l, m)] over all product and coupled states."""
    a, b = HalfInt.of(l1), HalfInt.of(l2)
    products = [(tm1, tm2) for tm1 in range(a.twice, -a.twice - 1, -2)
                for tm2 in range(b.twice, -b.twice - 1, -2)]
    coupled = [(tl, tm) for tl in range(a.twice + b.twice, abs(a.twice - b.twice) - 1, -2)
               for tm in range(tl, -tl - 1, -2)]
    mat = np.zeros((len(products), len(coupled)))
    for i, (tm1, tm2) in enumerate(products):
        for j, (tl, tm) in enumerate(coupled):
            mat[i, j] = cg_coefficient(a, HalfInt(tm1), b, HalfInt(tm2), HalfInt(tl), HalfInt(tm))
    return mat


def mixing_angle(l1: HalfIntLike, l: HalfIntLike, m: HalfIntLike) -> float:
    """Angle theta in [0, 2pi) with cos(theta/2), sin(theta/2) = psi(+1/2), psi(-1/2).

    psi(s) is the weight of the new spin having projection s when l1 is coupled
    to one more spin-1/2 to give (l, m).

    Raises:
        LabelError: If l is not l1 +/- 1/2 or |m| > l
    """
    l1, l, m = HalfInt.of(l1), HalfInt.of(l), HalfInt.of(m)
    if abs(l.twice - l1.twice) != 1 or l.twice < 0:
        raise LabelError(f"Mixing angle needs l = l1 +/- 1/2, got l1={l1}, l={l}")
    SpinLabel(l, m)
    psi_up = cg_coefficient(l1, m - HALF, HALF, HALF, l, m)
    psi_down = cg_coefficient(l1, m + HALF, HALF, -HALF, l, m)
    return (2 * math.atan2(psi_down, psi_up)) % (2 * math.pi)


# --- Coupling trees ---------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    """A single qubit; always carries spin 1/2."""

    qubit: int

    @property
    def l(self) -> HalfInt:
        return HALF

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)

    @property
    def is_labeled(self) -> bool:
        return True


@dataclass(frozen=True)
class Node:
    """Internal coupling node; ``l`` is None for an unlabeled shape."""

    left: "CouplingTree"
    right: "CouplingTree"
    l: HalfInt | None = None

    def __post_init__(self):
        if self.l is not None:
            object.__setattr__(self, "l", HalfInt.of(self.l))

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.left.qubits + self.right.qubits

    @property
    def is_labeled(self) -> bool:
        return self.l is not None and self.left.is_labeled and self.right.is_labeled


CouplingTree = Union[Leaf, Node]


def internal_nodes(tree: CouplingTree) -> Iterator[Node]:
    """Internal nodes in post-order (children before parents, left before right)."""
    if isinstance(tree, Node):
        yield from internal_nodes(tree.left)
        yield from internal_nodes(tree.right)
        yield tree


def n_qubits(tree: CouplingTree) -> int:
    return len(tree.qubits)


def validate_tree(tree: CouplingTree, require_labels: bool = True) -> None:
    """Check that leaves form a permutation of 0..n-1 and every node obeys the triangle rule.

    Raises:
        LabelError: On a missing label, a triangle-rule violation or leaves
            that are not a permutation of the qubit indices
    """
    qubits = tree.qubits
    if sorted(qubits) != list(range(len(qubits))):
        raise LabelError(f"Tree leaves must be a permutation of 0..{len(qubits) - 1}, got {qubits}")
    for node in internal_nodes(tree):
        if node.l is None:
            if require_labels:
                raise LabelError(f"Unlabeled node over qubits {node.qubits}")
            continue
        lower = [c.l for c in (node.left, node.right)]
        if any(x is None for x in lower):
            continue
        if not triangle_ok(lower[0], lower[1], node.l):
            raise LabelError(
                f"Triangle rule violated at node over qubits {node.qubits}",
                details={"left": str(lower[0]), "right": str(lower[1]), "l": str(node.l)},
            )


def node_labels(tree: CouplingTree) -> tuple[int, ...]:
    """Twice-values of internal node labels in post-order."""
    return tuple(node.l.twice if node.l is not None else -1 for node in internal_nodes(tree))


def strip_labels(tree: CouplingTree) -> CouplingTree:
    if isinstance(tree, Leaf):
        return tree
    return Node(strip_labels(tree.left), strip_labels(tree.right), None)


def chain_shape(n: int) -> CouplingTree:
    """Unlabeled chain ((0, 1), 2), ...)."""
    if n < 1:
        raise DimensionError(f"Need at least one qubit, got n={n}")
    tree: CouplingTree = Leaf(0)
    for q in range(1, n):
        tree = Node(tree, Leaf(q))
    return tree


def chain_tree(intermediates: list[HalfIntLike]) -> CouplingTree:
    """Chain tree whose k-th internal node (covering qubits 0..k+1) carries intermediates[k]."""
    tree: CouplingTree = Leaf(0)
    for q, l in enumerate(intermediates, start=1):
        tree = Node(tree, Leaf(q), HalfInt.of(l))
    validate_tree(tree)
    return tree


def bowtie_shape() -> CouplingTree:
    """Five spins: L = {0,1}, LC = {0,1,2}, R = {3,4}."""
    return Node(Node(Node(Leaf(0), Leaf(1)), Leaf(2)), Node(Leaf(3), Leaf(4)))


def bowtie_tree(l_left: HalfIntLike, l_left_center: HalfIntLike, l_right: HalfIntLike,
                l: HalfIntLike) -> CouplingTree:
    tree = Node(
        Node(Node(Leaf(0), Leaf(1), HalfInt.of(l_left)), Leaf(2), HalfInt.of(l_left_center)),
        Node(Leaf(3), Leaf(4), HalfInt.of(l_right)),
        HalfInt.of(l),
    )
    validate_tree(tree)
    return tree


def is_chain(tree: CouplingTree) -> bool:
    """True when every internal node's right child is a leaf (left-deep comb)."""
    node = tree
    while isinstance(node, Node):
        if not isinstance(node.right, Leaf):
            return False
        node = node.left
    return True


def tree_to_json(tree: CouplingTree) -> dict:
    if isinstance(tree, Leaf):
        return {"leaf": tree.qubit}
    out: dict = {"left": tree_to_json(tree.left), "right": tree_to_json(tree.right)}
    if tree.l is not None:
        out = {"l": str(tree.l), **out}
    return out


def tree_from_json(data: dict) -> CouplingTree:
    """Parse ``{"leaf": 0}`` or ``{"l": "1/2", "left": ..., "right": ...}``."""
    if not isinstance(data, dict):
        raise ConfigError(f"Coupling tree node must be an object, got {type(data).__name__}")
    if "leaf" in data:
        return Leaf(int(data["leaf"]))
    if "left" not in data or "right" not in data:
        raise ConfigError("Internal tree node needs 'left' and 'right'", details={"node": data})
    l = data.get("l")
    return Node(tree_from_json(data["left"]), tree_from_json(data["right"]),
                HalfInt.of(l) if l is not None else None)


# --- Eigenstates ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LabeledState:
    """Classical amplitudes of a coupled eigenstate, indexed by global basis index."""

    tree: CouplingTree
    m: HalfInt
    amplitudes: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return n_qubits(self.tree)

    def as_dict(self, atol: float = 1e-14) -> dict[str, float]:
        """Nonzero amplitudes keyed by basis string (qubit 0 leftmost)."""
        return {
            basis_string(i, self.n): float(a)
            for i, a in enumerate(self.amplitudes)
            if abs(a) > atol
        }


def basis_string(index: int, n: int) -> str:
    return format(index, f"0{n}b") if n else ""


@lru_cache(maxsize=1024)
def _local_state(tree: CouplingTree, tm: int) -> np.ndarray:
    """Amplitudes over the tree's own leaf order (tree.qubits)."""
    if isinstance(tree, Leaf):
        return np.array([1.0, 0.0]) if tm == 1 else np.array([0.0, 1.0])
    left, right = tree.left, tree.right
    tl_left, tl_right = left.l.twice, right.l.twice
    out = np.zeros(2 ** len(tree.qubits))
    for tm1 in range(-tl_left, tl_left + 1, 2):
        tm2 = tm - tm1
        if abs(tm2) > tl_right:
            continue
        coeff = cg_coefficient(left.l, HalfInt(tm1), right.l, HalfInt(tm2), tree.l, HalfInt(tm))
        if coeff == 0.0:
            continue
        out += coeff * np.kron(_local_state(left, tm1), _local_state(right, tm2))
    return out


def to_global_order(local: np.ndarray, order: tuple[int, ...]) -> np.ndarray:
    """Permute a vector whose i-th tensor factor is qubit order[i] into qubit order 0..n-1."""
    n = len(order)
    if list(order) == list(range(n)):
        return local
    tensor = local.reshape([2] * n)
    return np.transpose(tensor, np.argsort(order)).reshape(-1)


def eigenstate_amplitudes(tree: CouplingTree, m: HalfIntLike) -> LabeledState:
    """Simultaneous eigenstate of every node's S^2 and of S_z, by bottom-up CG expansion.

    Raises:
        LabelError: If the tree violates a triangle rule or |m| exceeds the root spin
    """
    m = HalfInt.of(m)
    validate_tree(tree)
    SpinLabel(tree.l, m)
    amps = to_global_order(_local_state(tree, m.twice), tree.qubits)
    norm = np.linalg.norm(amps)
    logger.debug(f"Eigenstate over {len(tree.qubits)} qubits, m={m}, norm={norm:.15f}")
    return LabeledState(tree=tree, m=m, amplitudes=amps / norm)


def _labelings(shape: CouplingTree) -> list[CouplingTree]:
    if isinstance(shape, Leaf):
        return [shape]
    options = []
    for left in _labelings(shape.left):
        for right in _labelings(shape.right):
            a, b = left.l.twice, right.l.twice
            for tl in range(abs(a - b), a + b + 1, 2):
                options.append(Node(left, right, HalfInt(tl)))
    return options


def enumerate_labelings(shape: CouplingTree) -> list[CouplingTree]:
    """Every triangle-consistent labeling of ``shape``, sorted by post-order twice-values."""
    validate_tree(shape, require_labels=False)
    return sorted(_labelings(strip_labels(shape)), key=node_labels)


def enumerate_states(shape: CouplingTree) -> list[tuple[CouplingTree, HalfInt]]:
    """All (labeling, m) pairs, m ascending within each labeling."""
    return [
        (tree, HalfInt(tm))
        for tree in enumerate_labelings(shape)
        for tm in range(-tree.l.twice, tree.l.twice + 1, 2)
    ]
