"""Spin Circuits - Variational Tools

Builds the preparation circuit for an experiment: the exact recursive
construction, or a noiselessly optimized Ry / time-evolution ansatz.
"""
import logging
from typing import Any, Dict, Optional, Tuple

from ..circuit import Circuit
from ..models.experiment import ExperimentConfig
from ..models.reports import OptimizationReport
from ..simulator import StateVector
from ..spin import eigenstate_amplitudes
from ..synthesis import ChainLabels, Labels, labels_circuit
from ..variational import CostSpec, RyAnsatz, TimeEvoAnsatz, initial_state_for, optimize
from ..utils.errors import ConfigError

logger = logging.getLogger(__name__)


def cost_spec_for(labels: Labels) -> CostSpec:
    if isinstance(labels, ChainLabels):
        return CostSpec.for_chain(labels)
    return CostSpec.for_tree(labels.tree, labels.m)


def ansatz_for(config: ExperimentConfig, labels: Labels):
    """Ansatz named by ``config.method``.

    Raises:
        ConfigError: For the time-evolution ansatz on a non-chain target
    """
    if config.method == "vqe-ry":
        return RyAnsatz(labels.n, config.depth)
    if config.method == "vqe-timeevo":
        if not isinstance(labels, ChainLabels):
            raise ConfigError("The time-evolution ansatz needs a chain target")
        return TimeEvoAnsatz(labels.n, config.reps, initial=initial_state_for(labels))
    raise ConfigError(f"{config.method} is not a variational method")


def optimize_state(config: ExperimentConfig, workers: int = 1) -> Tuple[Circuit, OptimizationReport]:
    """Optimize the configured ansatz for the target and return the best circuit.

    Returns:
        The optimized circuit and its OptimizationReport
    """
    labels = config.labels()
    ansatz = ansatz_for(config, labels)
    exact = eigenstate_amplitudes(labels.tree, labels.m)
    result = optimize(
        cost_spec_for(labels),
        ansatz,
        seed=config.seed,
        restarts=config.restarts,
        max_iters=config.max_iters,
        target=StateVector(exact.n, exact.amplitudes),
        workers=workers,
    )
    if not result.converged:
        logger.warning(f"Best restart for {labels} stopped before the gradient tolerance (cost={result.cost:.3e})")
    report = OptimizationReport.model_validate(result.as_dict())
    return ansatz.build(result.params), report


def circuit_for(config: ExperimentConfig, workers: int = 1) -> Tuple[Circuit, Optional[OptimizationReport]]:
    """Preparation circuit for ``config``; variational methods also return their report."""
    if config.method == "erc":
        return labels_circuit(config.labels()), None
    return optimize_state(config, workers)


def optimization_summary(config: ExperimentConfig, workers: int = 1) -> Dict[str, Any]:
    """OptimizationReport fields plus the labels and method, as a JSON-able dict."""
    _, report = optimize_state(config, workers)
    return {"labels": config.labels().format(), "method": config.method, **report.model_dump()}
