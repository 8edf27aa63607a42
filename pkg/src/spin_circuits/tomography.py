"""Full state tomography from local Pauli settings.

Every Pauli string's expectation is averaged over all settings that measure
it, the density matrix is rebuilt by linear inversion, and the result is
projected onto the nearest unit-trace positive semidefinite matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, fold_cnots
from .mitigation import ConfusionMatrix, ExtrapolationResult, calibrate, mitigate_counts, noise_scale, richardson
from .models.simulation import NoiseModel
from .pauli import MeasurementSetting, PauliString, parity
from .simulator import DensityMatrix, State, StateVector, distribution, fidelity, purity, run_density, sample_distribution
from .utils.errors import ConfigError, DimensionError, MissingSettingsError
from .utils.seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TomoSettings:
    """Local measurement bases, shots per basis (None for exact) and root seed."""

    n: int
    bases: tuple[str, ...]
    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        bases = tuple(b.upper() for b in self.bases)
        for basis in bases:
            if len(basis) != self.n or any(c not in "XYZ" for c in basis):
                raise ConfigError(f"Invalid {self.n}-qubit tomography setting {basis!r}")
        if len(set(bases)) != len(bases):
            raise ConfigError("Tomography settings must be distinct")
        if self.shots is not None and self.shots < 1:
            raise ConfigError(f"Need at least one shot per setting, got {self.shots}")
        object.__setattr__(self, "bases", bases)

    @classmethod
    def full(cls, n: int, shots: int | None = None, seed: int = 0) -> "TomoSettings":
        """All 3^n settings in lexicographic X < Y < Z order."""
        return cls(n, tuple("".join(p) for p in product("XYZ", repeat=n)), shots, seed)


def measure_state(
    state: State,
    settings: TomoSettings,
    noise: NoiseModel | None = None,
    confusion: ConfusionMatrix | None = None,
) -> dict[str, np.ndarray]:
    """Outcome distribution per setting, readout-mitigated when ``confusion`` is given."""
    if state.n != settings.n:
        raise DimensionError(f"{settings.n}-qubit settings applied to a {state.n}-qubit state")
    data: dict[str, np.ndarray] = {}
    for basis in settings.bases:
        probs = distribution(state, MeasurementSetting(basis, ()).basis_change(), noise)
        if settings.shots is not None:
            seed = derive_seed(settings.seed, "tomo", basis)
            probs = sample_distribution(probs, settings.n, settings.shots, seed).probabilities(settings.n)
        if confusion is not None:
            probs = mitigate_counts(confusion, probs)
        data[basis] = probs
    return data


def measure_settings(
    circuit: Circuit,
    noise: NoiseModel,
    settings: TomoSettings,
    em: bool = False,
) -> dict[str, np.ndarray]:
    """Run ``circuit`` under ``noise`` and measure every setting."""
    confusion = calibrate(noise, settings.n, settings.shots, derive_seed(settings.seed, "calibration")) if em else None
    return measure_state(run_density(circuit, noise), settings, noise, confusion)


def pauli_expectations(data: Mapping[str, np.ndarray], n: int) -> dict[PauliString, float]:
    """<P> for all 4^n strings, averaged over every compatible setting.

    Raises:
        MissingSettingsError: If any of the 3^n full settings is absent
    """
    missing = ["".join(p) for p in product("XYZ", repeat=n) if "".join(p) not in data]
    if missing:
        raise MissingSettingsError(
            f"Tomography data lacks {len(missing)} of {3 ** n} settings",
            details={"missing": missing[:10]},
        )
    idx = np.arange(2 ** n)
    out: dict[PauliString, float] = {}
    for letters in product("IXYZ", repeat=n):
        pauli = PauliString.from_label("".join(letters))
        signs = 1 - 2 * parity(idx & pauli.support)
        values = [
            float(np.dot(probs, signs))
            for basis, probs in data.items()
            if all(l == "I" or l == b for l, b in zip(letters, basis))
        ]
        out[pauli] = float(np.mean(values))
    return out


def project_psd(matrix: np.ndarray) -> DensityMatrix:
    """Frobenius-nearest unit-trace PSD matrix: eigenvalues projected onto the simplex."""
    mat = np.asarray(matrix, dtype=complex)
    mat = (mat + mat.conj().T) / 2
    values, vectors = np.linalg.eigh(mat)
    ordered = np.sort(values)[::-1]
    cumulative = np.cumsum(ordered) - 1.0
    ranks = np.arange(1, ordered.size + 1)
    keep = ordered - cumulative / ranks > 0
    rho = ranks[keep][-1]
    shift = cumulative[rho - 1] / rho
    clipped = np.clip(values - shift, 0.0, None)
    projected = (vectors * clipped) @ vectors.conj().T
    n = mat.shape[0].bit_length() - 1
    return DensityMatrix(n, (projected + projected.conj().T) / 2)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    raw: np.ndarray = field(repr=False)
    projected: DensityMatrix = field(repr=False)


def reconstruct(data: Mapping[str, np.ndarray], n: int | None = None) -> Reconstruction:
    """Linear inversion rho = sum_P <P> P / 2^n, followed by PSD projection."""
    if n is None:
        if not data:
            raise MissingSettingsError("No tomography data")
        n = len(next(iter(data)))
    expectations = pauli_expectations(data, n)
    dim = 2 ** n
    raw = np.zeros((dim, dim), dtype=complex)
    for pauli, value in expectations.items():
        raw += value * pauli.to_matrix()
    raw /= dim
    projected = project_psd(raw)
    logger.debug(f"Reconstructed {n}-qubit state, raw min eigenvalue {np.linalg.eigvalsh(raw)[0]:.3e}")
    return Reconstruction(raw=raw, projected=projected)


def report(rho: DensityMatrix, ideal: StateVector) -> dict[str, float]:
    return {"fidelity": fidelity(rho, ideal), "purity": purity(rho)}


@dataclass(frozen=True)
class TomographyResult:
    fidelity_raw: float
    fidelity_projected: float
    purity: float
    settings: int
    shots_per_setting: int | None

    def as_dict(self) -> dict:
        return {
            "fidelity_raw": self.fidelity_raw,
            "fidelity_projected": self.fidelity_projected,
            "purity": self.purity,
            "settings": self.settings,
            "shots_per_setting": self.shots_per_setting,
        }


def run_tomography(
    circuit: Circuit,
    noise: NoiseModel,
    ideal: StateVector,
    shots: int | None = None,
    seed: int = 0,
    em: bool = False,
) -> TomographyResult:
    """Full tomography of ``circuit`` under ``noise`` scored against ``ideal``."""
    settings = TomoSettings.full(circuit.n_qubits, shots, seed)
    if circuit.n_qubits >= 5 and shots is not None:
        logger.warning(f"Full tomography of {circuit.n_qubits} qubits samples {3 ** circuit.n_qubits} settings")
    result = reconstruct(measure_settings(circuit, noise, settings, em), circuit.n_qubits)
    scores = report(result.projected, ideal)
    return TomographyResult(
        fidelity_raw=fidelity(result.raw, ideal),
        fidelity_projected=scores["fidelity"],
        purity=scores["purity"],
        settings=len(settings.bases),
        shots_per_setting=shots,
    )


def extrapolated_fidelity(
    circuit: Circuit,
    noise: NoiseModel,
    ideal: StateVector,
    ks: Sequence[int] = (0, 1, 2),
    shots: int | None = None,
    seed: int = 0,
    em: bool = False,
) -> ExtrapolationResult:
    """Projected tomography fidelity at r = 2k + 1, extrapolated to r = 0."""
    points = []
    for k in sorted(set(ks)):
        folded = fold_cnots(circuit, k)
        result = run_tomography(folded, noise, ideal, shots, derive_seed(seed, "fold", k), em)
        points.append((noise_scale(k), result.fidelity_projected))
    return richardson(points)
