"""Exact circuits for total-spin eigenstates.

Chains are built recursively: the newest spin is placed on the highest qubit,
rotated by the mixing angle, and then each of its two basis states controls
the circuit for the remaining spins with m shifted by -/+ 1/2. Other coupling
trees go through real-amplitude synthesis with uniformly controlled Ry
cascades. ``cost_recursion`` provides the analytic gate-count model.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .circuit import Circuit, GateCounts, Polarity, cnot, control_wrap, counts, decompose_native, ry, simplify, x
from .spin import (
    HALF,
    CouplingTree,
    HalfInt,
    HalfIntLike,
    Leaf,
    SpinLabel,
    bowtie_shape,
    bowtie_tree,
    chain_shape,
    chain_tree,
    eigenstate_amplitudes,
    enumerate_states,
    internal_nodes,
    is_chain,
    mixing_angle,
    validate_tree,
)
from .utils.errors import ConfigError, LabelError, NumericalError

logger = logging.getLogger(__name__)

INT64_MAX = 2 ** 63 - 1


@dataclass(frozen=True)
class ChainLabels:
    """Intermediate spins l(2), ..., l(n) of a chain coupling plus the final m.

    l(1) = 1/2 is implicit; consecutive spins differ by exactly 1/2.
    """

    intermediates: tuple[HalfInt, ...]
    m: HalfInt

    def __post_init__(self):
        inter = tuple(HalfInt.of(v) for v in self.intermediates)
        object.__setattr__(self, "intermediates", inter)
        object.__setattr__(self, "m", HalfInt.of(self.m))
        previous = HALF
        for k, l in enumerate(inter, start=2):
            if l.twice < 0 or abs(l.twice - previous.twice) != 1:
                raise LabelError(
                    f"Chain spin l({k})={l} must differ from l({k - 1})={previous} by 1/2",
                )
            previous = l
        SpinLabel(self.l, self.m)

    @classmethod
    def of(cls, intermediates: list[HalfIntLike], m: HalfIntLike) -> "ChainLabels":
        return cls(tuple(HalfInt.of(v) for v in intermediates), HalfInt.of(m))

    @property
    def n(self) -> int:
        return len(self.intermediates) + 1

    @property
    def l(self) -> HalfInt:
        return self.intermediates[-1] if self.intermediates else HALF

    @property
    def tree(self) -> CouplingTree:
        return chain_tree(list(self.intermediates)) if self.intermediates else Leaf(0)

    @property
    def is_dicke(self) -> bool:
        """Symmetric state with l = n/2 that is not a product state."""
        return self.l.twice == self.n and abs(self.m.twice) < self.l.twice

    def spin_at(self, k: int) -> HalfInt:
        """l(k), the spin of the first k qubits."""
        return HALF if k == 1 else self.intermediates[k - 2]

    def format(self) -> str:
        parts = [f"{_prefix_key(k)}={self.spin_at(k)}" for k in range(2, self.n)]
        parts += [f"l={self.l}", f"m={self.m}"]
        return ",".join(parts)

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class BowtieLabels:
    """Five-spin labels: L = {0,1}, LC = {0,1,2}, R = {3,4}, total l and m."""

    l_left: HalfInt
    l_left_center: HalfInt
    l_right: HalfInt
    l: HalfInt
    m: HalfInt

    def __post_init__(self):
        for name in ("l_left", "l_left_center", "l_right", "l", "m"):
            object.__setattr__(self, name, HalfInt.of(getattr(self, name)))
        validate_tree(self.tree)
        SpinLabel(self.l, self.m)

    @property
    def n(self) -> int:
        return 5

    @property
    def tree(self) -> CouplingTree:
        return bowtie_tree(self.l_left, self.l_left_center, self.l_right, self.l)

    def format(self) -> str:
        return (f"lL={self.l_left},lLC={self.l_left_center},lR={self.l_right},"
                f"l={self.l},m={self.m}")

    def __str__(self) -> str:
        return self.format()


Labels = Union[ChainLabels, BowtieLabels]

_PREFIX_KEY = re.compile(r"^l(0(?:1(?:2(?:3(?:4(?:5(?:6(?:7(?:8(?:9)?)?)?)?)?)?)?)?)?)$")
_STEP_KEY = re.compile(r"^l([1-9][0-9]*)$")


def _prefix_key(k: int) -> str:
    return "l" + "".join(str(i) for i in range(k)) if k <= 10 else f"l{k}"


def _split_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ConfigError(f"Label item {chunk!r} is not key=value", details={"labels": text})
        key, value = (s.strip() for s in chunk.split("=", 1))
        if key in pairs:
            raise ConfigError(f"Label key {key!r} given twice", details={"labels": text})
        pairs[key] = value
    return pairs


def parse_labels(text: str) -> Labels:
    """Parse "l01=1,l=3/2,m=-1/2" (chain) or "lL=0,lLC=1/2,lR=1,l=1/2,m=-1/2" (bowtie).

    Chain intermediates may also be written l<k>=... for the spin of the
    first k qubits.

    Raises:
        ConfigError: On unknown keys, gaps or malformed values
        LabelError: On coupling-rule violations
    """
    pairs = _split_pairs(text)
    if "m" not in pairs or "l" not in pairs:
        raise ConfigError("Labels need both 'l' and 'm'", details={"labels": text})
    if {"lL", "lLC", "lR"} & pairs.keys():
        extra = pairs.keys() - {"lL", "lLC", "lR", "l", "m"}
        if extra or len(pairs) != 5:
            raise ConfigError("Bowtie labels need exactly lL, lLC, lR, l, m", details={"labels": text})
        return BowtieLabels(*(HalfInt.of(pairs[k]) for k in ("lL", "lLC", "lR", "l", "m")))

    steps: dict[int, HalfInt] = {}
    for key, value in pairs.items():
        if key in ("l", "m"):
            continue
        prefix, step = _PREFIX_KEY.match(key), _STEP_KEY.match(key)
        if prefix:
            k = len(prefix.group(1))
        elif step:
            k = int(step.group(1))
        else:
            raise ConfigError(f"Unknown label key {key!r}", details={"labels": text})
        if k in steps:
            raise ConfigError(f"Spin of the first {k} qubits given twice", details={"labels": text})
        steps[k] = HalfInt.of(value)
    if 1 in steps:
        if steps.pop(1) != HALF:
            raise LabelError("A single spin always has l = 1/2")
    final = HalfInt.of(pairs["l"])
    n = max(steps) + 1 if steps else (1 if final == HALF else 2)
    missing = [k for k in range(2, n) if k not in steps]
    if missing:
        raise ConfigError(f"Missing chain spins for prefixes {missing}", details={"labels": text})
    intermediates = [steps[k] for k in range(2, n)] + ([final] if n > 1 else [])
    return ChainLabels(tuple(intermediates), HalfInt.of(pairs["m"]))


def format_labels(labels: Labels) -> str:
    """Inverse of ``parse_labels``."""
    return labels.format()


def chain_labelings(n: int) -> list[ChainLabels]:
    """Every chain (spins, m) state on n qubits in enumeration order."""
    out = []
    for tree, m in enumerate_states(chain_shape(n)):
        out.append(ChainLabels(tuple(node.l for node in internal_nodes(tree)), m))
    return out


def bowtie_labelings() -> list[BowtieLabels]:
    """Every bowtie (spins, m) state in enumeration order."""
    out = []
    for tree, m in enumerate_states(bowtie_shape()):
        nodes = list(internal_nodes(tree))
        l_left, l_left_center, l_right, l = (node.l for node in nodes)
        out.append(BowtieLabels(l_left, l_left_center, l_right, l, m))
    return out


# --- Exact recursive construction -------------------------------------------


def erc_base(label: SpinLabel, n: int | None = None) -> Circuit:
    """Circuit preparing a one- or two-spin eigenstate from |0...0>.

    Raises:
        LabelError: If the label does not exist for that many spins
    """
    if not isinstance(label, SpinLabel):
        label = SpinLabel(*label)
    n = n if n is not None else (1 if label.l == HALF else 2)
    if n == 1:
        if label.l != HALF:
            raise LabelError(f"A single spin has l = 1/2, got {label}")
        return Circuit(1, () if label.m == HALF else (x(0),))
    if n != 2 or label.l.twice not in (0, 2):
        raise LabelError(f"No {n}-spin base circuit for {label}")
    key = (label.l.twice, label.m.twice)
    gates = {
        (0, 0): (ry(0, -math.pi / 2), cnot(0, 1), x(1)),
        (2, 0): (ry(0, math.pi / 2), cnot(0, 1), x(1)),
        (2, 2): (),
        (2, -2): (x(0), x(1)),
    }[key]
    return Circuit(2, gates)


def _clamp(tm: int, tl: int) -> int:
    return max(-tl, min(tl, tm))


@lru_cache(maxsize=4096)
def _erc(spins: tuple[int, ...], tm: int, prune: bool) -> Circuit:
    """Circuit for chain twice-spins ``spins`` = (l(2), ..., l(k)) and twice-m ``tm``."""
    k = len(spins) + 1
    if k <= 2:
        l = HalfInt(spins[0]) if spins else HALF
        return erc_base(SpinLabel(l, HalfInt(tm)), k)

    tl_prev, tl = spins[-2], spins[-1]
    rest = spins[:-1]
    q = k - 1
    theta = mixing_angle(HalfInt(tl_prev), HalfInt(tl), HalfInt(tm))
    up_ok = abs(tm - 1) <= tl_prev
    down_ok = abs(tm + 1) <= tl_prev

    if prune and not (up_ok and down_ok):
        if up_ok:
            return _erc(rest, tm - 1, prune).widen(k)
        return _erc(rest, tm + 1, prune).widen(k).then(x(q))

    up = _erc(rest, tm - 1 if up_ok else _clamp(tm - 1, tl_prev), prune)
    down = _erc(rest, tm + 1 if down_ok else _clamp(tm + 1, tl_prev), prune)
    circuit = Circuit(k, (ry(q, theta),))
    circuit = circuit + control_wrap(up, q, Polarity.ON_ZERO)
    circuit = circuit + control_wrap(down, q, Polarity.ON_ONE)
    return circuit


def erc_chain(labels: ChainLabels, prune: bool = True) -> Circuit:
    """Exact circuit preparing the chain eigenstate ``labels`` from |0...0>.

    With ``prune=False`` branches of zero weight are still emitted, controlled
    by a basis state of the new qubit that never occurs.
    """
    spins = tuple(l.twice for l in labels.intermediates)
    circuit = _erc(spins, labels.m.twice, prune)
    logger.debug(f"ERC for {labels}: {len(circuit)} top-level gates")
    return circuit.widen(labels.n)


# --- General trees ----------------------------------------------------------


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def uniformly_controlled_ry(controls: list[int], target: int, angles: np.ndarray) -> list:
    """Ry(angles[c]) on ``target`` for control value c (controls[0] most significant)."""
    k = len(controls)
    if k == 0:
        return [ry(target, float(angles[0]))]
    size = 2 ** k
    signs = np.array([[(-1) ** bin(c & _gray(i)).count("1") for i in range(size)] for c in range(size)])
    thetas = signs.T @ np.asarray(angles, dtype=float) / size
    gates = []
    for i in range(size):
        gates.append(ry(target, float(thetas[i])))
        changed = _gray(i) ^ _gray((i + 1) % size)
        bit = changed.bit_length() - 1
        gates.append(cnot(controls[k - 1 - bit], target))
    return gates


def prepare_real_amplitudes(amplitudes: np.ndarray) -> Circuit:
    """Exact preparation of a real normalized vector by a uniformly controlled Ry cascade.

    Raises:
        NumericalError: If the amplitudes are complex or not normalized
    """
    vec = np.asarray(amplitudes)
    if np.iscomplexobj(vec):
        if np.abs(vec.imag).max() > 1e-12:
            raise NumericalError("Amplitude synthesis needs real amplitudes")
        vec = vec.real
    n = vec.size.bit_length() - 1
    if 2 ** n != vec.size or abs(np.linalg.norm(vec) - 1) > 1e-10:
        raise NumericalError("Amplitude synthesis needs a normalized vector of length 2^n")
    tensor = vec.reshape([2] * n)
    gates = []
    for k in range(n):
        block = tensor.reshape(2 ** k, 2, -1)
        if k < n - 1:
            a0 = np.linalg.norm(block[:, 0, :], axis=1)
            a1 = np.linalg.norm(block[:, 1, :], axis=1)
        else:
            a0, a1 = block[:, 0, 0], block[:, 1, 0]
        angles = 2 * np.arctan2(a1, a0)
        gates.extend(uniformly_controlled_ry(list(range(k)), k, angles))
    return simplify(Circuit(n, tuple(gates)))


def tree_circuit(tree: CouplingTree, m: HalfIntLike) -> Circuit:
    """Circuit preparing eigenstate_amplitudes(tree, m).

    Chains (in any leaf order) use the recursive construction; other shapes
    use real-amplitude synthesis of the classically computed state.
    """
    m = HalfInt.of(m)
    validate_tree(tree)
    SpinLabel(tree.l, m)
    n = len(tree.qubits)
    if isinstance(tree, Leaf):
        return Circuit(tree.qubit + 1, () if m == HALF else (x(tree.qubit),)).widen(n)
    if is_chain(tree):
        labels = ChainLabels(tuple(node.l for node in internal_nodes(tree)), m)
        return erc_chain(labels).remap(list(tree.qubits), n)
    state = eigenstate_amplitudes(tree, m)
    logger.info(f"Amplitude synthesis for a {n}-qubit non-chain tree, m={m}")
    return prepare_real_amplitudes(state.amplitudes)


def labels_circuit(labels: Labels) -> Circuit:
    if isinstance(labels, ChainLabels):
        return erc_chain(labels)
    return tree_circuit(labels.tree, labels.m)


# --- Cost model -------------------------------------------------------------


@dataclass(frozen=True)
class CostModel:
    """Gate counts predicted by c(k+1) = 16 c + 4 s, s(k+1) = 12 c + 4 s from (1, 2)."""

    n: int
    c: int
    s: int


def cost_recursion(n: int) -> CostModel:
    """Iterate the gate-count recursion from n = 2.

    Raises:
        ConfigError: If n < 2
        NumericalError: If a count leaves the signed 64-bit range
    """
    if n < 2:
        raise ConfigError(f"Cost recursion starts at n=2, got n={n}")
    c, s = 1, 2
    for k in range(2, n):
        c, s = 16 * c + 4 * s, 12 * c + 4 * s
        if c > INT64_MAX or s > INT64_MAX:
            raise NumericalError(f"Cost recursion overflows 64 bits at n={k + 1}")
    return CostModel(n=n, c=c, s=s)


def growth_rate() -> float:
    """Dominant eigenvalue of the recursion matrix [[16, 4], [12, 4]]."""
    return float(max(np.linalg.eigvals(np.array([[16.0, 4.0], [12.0, 4.0]])).real))


def compiled_counts(circuit: Circuit) -> GateCounts:
    return counts(simplify(decompose_native(circuit)))
