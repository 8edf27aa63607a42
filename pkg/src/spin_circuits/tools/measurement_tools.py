"""Spin Circuits - Measurement Tools

Pipelines behind the ``measure`` and ``tomo`` commands: noisy estimates of the
spin observables with readout mitigation and zero-noise extrapolation, and
full state tomography.
"""
import logging
from typing import List, Tuple

from ..mitigation import ConfusionMatrix, calibrate, mitigated_expectation
from ..models.experiment import ExperimentConfig
from ..models.reports import EstimateReport, TomographyReport
from ..models.simulation import NoiseModel
from ..pauli import ObservableSum, expectation, subset_s2, total_s2, total_sz
from ..simulator import run_statevector
from ..synthesis import BowtieLabels, Labels
from ..tomography import extrapolated_fidelity, run_tomography
from ..utils.seeding import derive_seed
from .state_tools import target_state
from .variational_tools import circuit_for

logger = logging.getLogger(__name__)

BOWTIE_SUBSETS = (("S2_L", (0, 1)), ("S2_LC", (0, 1, 2)), ("S2_R", (3, 4)))


def spin_observables(labels: Labels) -> List[Tuple[str, ObservableSum]]:
    """S_z, S^2 and the subset S^2 operators fixed by the labels."""
    n = labels.n
    out = [("Sz", total_sz(n)), ("S2", total_s2(n))]
    if isinstance(labels, BowtieLabels):
        out += [(name, subset_s2(n, qubits)) for name, qubits in BOWTIE_SUBSETS]
    else:
        out += [("S2_" + "".join(str(q) for q in range(k)), subset_s2(n, range(k))) for k in range(2, n)]
    return out


def measure_observables(config: ExperimentConfig, noise: NoiseModel, workers: int = 1) -> List[EstimateReport]:
    """Raw, mitigated and extrapolated estimates of every spin observable of the target."""
    labels = config.labels()
    circuit, _ = circuit_for(config, workers)
    ideal = run_statevector(circuit)
    n = labels.n
    if config.em:
        confusion = calibrate(noise, n, config.shots, derive_seed(config.seed, "calibration"))
    else:
        confusion = ConfusionMatrix.identity(n)
    logger.info(f"Measuring {labels} ({config.method}) with shots={config.shots}, em={config.em}, re={config.re}")

    reports = []
    for name, obs in spin_observables(labels):
        estimate = mitigated_expectation(
            obs,
            circuit,
            noise,
            ks=config.ks,
            shots=config.shots,
            seed=derive_seed(config.seed, "observable", name),
            confusion=confusion,
            workers=workers,
            extrapolate=config.re,
        )
        reports.append(EstimateReport(observable=name, exact=expectation(obs, ideal), **estimate.as_dict()))
    return reports


def state_tomography(config: ExperimentConfig, noise: NoiseModel, workers: int = 1) -> TomographyReport:
    """Full tomography of the prepared target, optionally extrapolated over folded circuits."""
    labels = config.labels()
    circuit, _ = circuit_for(config, workers)
    ideal = target_state(labels)
    result = run_tomography(circuit, noise, ideal, config.shots, config.seed, config.em)
    report = TomographyReport(**result.as_dict())
    if config.re:
        extrapolation = extrapolated_fidelity(circuit, noise, ideal, config.ks, config.shots, config.seed, config.em)
        report = report.model_copy(update={"fidelity_extrapolated": extrapolation.intercept})
    logger.info(f"Tomography of {labels}: fidelity={report.fidelity_projected:.6f}, purity={report.purity:.6f}")
    return report
