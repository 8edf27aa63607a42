"""Spin Circuits - State Preparation Tools

Pipelines behind the ``list``, ``prepare`` and ``gatecount`` commands:
- Enumerate the eigenstates of a spin system
- Prepare a target state and compare it with the exact amplitudes
- Tabulate the gate-count model against compiled circuits
"""
import logging
from typing import Any, Dict, List, Optional

import numpy as np

from ..models.circuit import CircuitModel
from ..models.experiment import ExperimentConfig
from ..models.reports import GateCountRow
from ..simulator import StateVector, overlap, run_statevector
from ..spin import basis_string, eigenstate_amplitudes
from ..synthesis import Labels, bowtie_labelings, chain_labelings, compiled_counts, cost_recursion, erc_chain
from ..utils.errors import ConfigError
from .variational_tools import circuit_for

logger = logging.getLogger(__name__)

AMPLITUDE_CUTOFF = 1e-10
MAX_COMPILED_N = 5


def system_labelings(system: str, n: Optional[int] = None) -> List[Labels]:
    """All eigenstates of ``system`` in enumeration order.

    Raises:
        ConfigError: For an unknown system or a chain-n request without n
    """
    if system == "chain-3":
        return chain_labelings(3)
    if system == "chain-n":
        if n is None or n < 1:
            raise ConfigError("chain-n needs --n with at least one spin")
        return chain_labelings(n)
    if system == "bowtie-5":
        return bowtie_labelings()
    raise ConfigError(f"Unknown system {system!r}")


def list_labelings(system: str, n: Optional[int] = None) -> List[Dict[str, Any]]:
    """One row per eigenstate: index, label string, n, l and m."""
    logger.info(f"Listing labelings for system={system}, n={n}")
    return [
        {"index": i, "labels": labels.format(), "n": labels.n, "l": str(labels.tree.l), "m": str(labels.m)}
        for i, labels in enumerate(system_labelings(system, n))
    ]


def target_state(labels: Labels) -> StateVector:
    """Exact eigenstate amplitudes for ``labels``."""
    state = eigenstate_amplitudes(labels.tree, labels.m)
    return StateVector(state.n, state.amplitudes)


def aligned(simulated: StateVector, reference: StateVector) -> np.ndarray:
    """``simulated`` amplitudes with the global phase that best matches ``reference``."""
    inner = np.vdot(simulated.amplitudes, reference.amplitudes)
    if abs(inner) < 1e-15:
        return simulated.amplitudes
    return simulated.amplitudes * (inner / abs(inner))


def prepare_state(config: ExperimentConfig, workers: int = 1) -> Dict[str, Any]:
    """Prepare the configured target and compare amplitudes with the exact state.

    Returns:
        Dictionary with labels, fidelity, per-basis amplitudes, the circuit,
        compiled gate counts and, for variational methods, the optimization report
    """
    labels = config.labels()
    circuit, optimization = circuit_for(config, workers)
    reference = target_state(labels)
    simulated = run_statevector(circuit)
    phased = aligned(simulated, reference)
    rows = []
    for index in range(reference.amplitudes.size):
        sim, ref = phased[index], reference.amplitudes[index]
        if abs(sim) > AMPLITUDE_CUTOFF or abs(ref) > AMPLITUDE_CUTOFF:
            rows.append({
                "basis": basis_string(index, labels.n),
                "simulated": float(sim.real),
                "simulated_imag": float(sim.imag),
                "oracle": float(ref.real),
            })
    counts = compiled_counts(circuit)
    fidelity = overlap(simulated, reference)
    logger.info(f"Prepared {labels} with {config.method}: fidelity={fidelity:.12f}, cnot={counts.cnot}")
    return {
        "labels": labels.format(),
        "method": config.method,
        "n": labels.n,
        "fidelity": fidelity,
        "amplitudes": rows,
        "circuit": CircuitModel.from_circuit(circuit).model_dump(mode="json", exclude_none=True),
        "counts": {"cnot": counts.cnot, "single_qubit": counts.single_qubit, "depth": counts.depth},
        "optimization": optimization.model_dump() if optimization is not None else None,
    }


def gate_count_table(n_min: int, n_max: int, compile_max: int = MAX_COMPILED_N) -> List[GateCountRow]:
    """Cost-recursion counts for each n, with compiled maxima over all chain states up to ``compile_max``.

    Raises:
        ConfigError: If the range is empty or starts below 2
    """
    if n_min < 2 or n_max < n_min:
        raise ConfigError(f"Gate-count range must satisfy 2 <= n_min <= n_max, got {n_min}..{n_max}")
    rows = []
    for n in range(n_min, n_max + 1):
        model = cost_recursion(n)
        row = GateCountRow(n=n, model_cnot=model.c, model_single=model.s, labelings=0)
        if n <= compile_max:
            compiled = [compiled_counts(erc_chain(labels)) for labels in chain_labelings(n)]
            row = row.model_copy(update={
                "compiled_cnot_max": max(c.cnot for c in compiled),
                "compiled_single_max": max(c.single_qubit for c in compiled),
                "labelings": len(compiled),
            })
        logger.debug(f"Gate counts n={n}: model=({model.c}, {model.s}), compiled={row.compiled_cnot_max}")
        rows.append(row)
    return rows
