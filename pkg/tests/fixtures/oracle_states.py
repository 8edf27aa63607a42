"""Hand-written total-spin eigenstates.

Amplitudes are written out from the two-spin singlet and triplet states and
the Condon-Shortley coefficients, without calling into the package, so they
can serve as an independent reference. Qubit 0 is the leftmost character of
each ket and |0> is spin up. Comparisons are up to a global phase.
"""
from dataclasses import dataclass
from math import sqrt

import numpy as np


def ket(amplitudes: dict[str, float]) -> np.ndarray:
    """Vector from {bitstring: amplitude}."""
    n = len(next(iter(amplitudes)))
    vec = np.zeros(2 ** n)
    for bits, amp in amplitudes.items():
        vec[int(bits, 2)] = amp
    return vec


UP = ket({"0": 1.0})
DOWN = ket({"1": 1.0})
SINGLET = ket({"01": 1 / sqrt(2), "10": -1 / sqrt(2)})
TRIPLET_UP = ket({"00": 1.0})
TRIPLET_ZERO = ket({"01": 1 / sqrt(2), "10": 1 / sqrt(2)})
TRIPLET_DOWN = ket({"11": 1.0})

# Three-spin doublets; the first two spins couple to l01 first.
DOUBLET_SINGLET_UP = np.kron(SINGLET, UP)
DOUBLET_SINGLET_DOWN = np.kron(SINGLET, DOWN)
DOUBLET_TRIPLET_UP = ket({"001": sqrt(2 / 3), "010": -1 / sqrt(6), "100": -1 / sqrt(6)})
DOUBLET_TRIPLET_DOWN = ket({"011": 1 / sqrt(6), "101": 1 / sqrt(6), "110": -sqrt(2 / 3)})


@dataclass(frozen=True)
class OracleState:
    labels: str
    spins: tuple[str, ...]
    m: str
    amplitudes: np.ndarray


CHAIN3_STATES = [
    OracleState("l01=0,l=1/2,m=-1/2", ("0", "1/2"), "-1/2", DOUBLET_SINGLET_DOWN),
    OracleState("l01=0,l=1/2,m=1/2", ("0", "1/2"), "1/2", DOUBLET_SINGLET_UP),
    OracleState("l01=1,l=1/2,m=-1/2", ("1", "1/2"), "-1/2", DOUBLET_TRIPLET_DOWN),
    OracleState("l01=1,l=1/2,m=1/2", ("1", "1/2"), "1/2", DOUBLET_TRIPLET_UP),
    OracleState("l01=1,l=3/2,m=-3/2", ("1", "3/2"), "-3/2", ket({"111": 1.0})),
    OracleState(
        "l01=1,l=3/2,m=-1/2", ("1", "3/2"), "-1/2",
        ket({"011": 1 / sqrt(3), "101": 1 / sqrt(3), "110": 1 / sqrt(3)}),
    ),
    OracleState(
        "l01=1,l=3/2,m=1/2", ("1", "3/2"), "1/2",
        ket({"001": 1 / sqrt(3), "010": 1 / sqrt(3), "100": 1 / sqrt(3)}),
    ),
    OracleState("l01=1,l=3/2,m=3/2", ("1", "3/2"), "3/2", ket({"000": 1.0})),
]

# Bowtie: L = {0, 1}, LC = {0, 1, 2}, R = {3, 4}; LC couples to R last.
BOWTIE_STATES = [
    OracleState(
        "lL=0,lLC=1/2,lR=0,l=1/2,m=1/2", ("0", "1/2", "0", "1/2"), "1/2",
        np.kron(DOUBLET_SINGLET_UP, SINGLET),
    ),
    OracleState(
        "lL=0,lLC=1/2,lR=0,l=1/2,m=-1/2", ("0", "1/2", "0", "1/2"), "-1/2",
        np.kron(DOUBLET_SINGLET_DOWN, SINGLET),
    ),
    OracleState(
        "lL=1,lLC=1/2,lR=0,l=1/2,m=1/2", ("1", "1/2", "0", "1/2"), "1/2",
        np.kron(DOUBLET_TRIPLET_UP, SINGLET),
    ),
    OracleState(
        "lL=1,lLC=1/2,lR=0,l=1/2,m=-1/2", ("1", "1/2", "0", "1/2"), "-1/2",
        np.kron(DOUBLET_TRIPLET_DOWN, SINGLET),
    ),
    OracleState(
        "lL=0,lLC=1/2,lR=1,l=1/2,m=1/2", ("0", "1/2", "1", "1/2"), "1/2",
        sqrt(1 / 3) * np.kron(DOUBLET_SINGLET_UP, TRIPLET_ZERO)
        - sqrt(2 / 3) * np.kron(DOUBLET_SINGLET_DOWN, TRIPLET_UP),
    ),
    OracleState(
        "lL=0,lLC=1/2,lR=1,l=1/2,m=-1/2", ("0", "1/2", "1", "1/2"), "-1/2",
        sqrt(2 / 3) * np.kron(DOUBLET_SINGLET_UP, TRIPLET_DOWN)
        - sqrt(1 / 3) * np.kron(DOUBLET_SINGLET_DOWN, TRIPLET_ZERO),
    ),
]


def phase_overlap(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for normalized vectors."""
    return float(abs(np.vdot(a, b)) ** 2)
