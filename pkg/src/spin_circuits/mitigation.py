"""Readout-error mitigation and Richardson extrapolation over CNOT folding."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Literal, Sequence

import numpy as np
import scipy.optimize

from .circuit import Circuit, fold_cnots, x
from .models.simulation import NoiseModel, ShotResult
from .pauli import ObservableSum, grouping
from .simulator import distribution, run_density, run_statevector, sample_distribution
from .utils.errors import ConfigError, DimensionError, SingularConfusionError
from .utils.seeding import derive_seed

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12
DEFAULT_KS = (0, 1, 2)

MitigationMethod = Literal["square", "inverse"]


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Column-stochastic M[observed, prepared], full or as per-qubit factors."""

    n: int
    factors: tuple[np.ndarray, ...] | None = field(default=None, repr=False)
    full: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.factors is None) == (self.full is None):
            raise ConfigError("A confusion matrix is either factored or full")
        mats = list(self.factors) if self.factors is not None else [self.full]
        for mat in mats:
            if (mat < -1e-15).any() or not np.allclose(mat.sum(axis=0), 1.0, atol=1e-10):
                raise ConfigError("Confusion matrices must be column stochastic")
        if self.factors is not None and len(self.factors) != self.n:
            raise DimensionError(f"Expected {self.n} per-qubit factors, got {len(self.factors)}")
        if self.full is not None and self.full.shape != (2 ** self.n, 2 ** self.n):
            raise DimensionError(f"Expected a {2 ** self.n}-dimensional confusion matrix, got {self.full.shape}")

    @classmethod
    def identity(cls, n: int) -> "ConfusionMatrix":
        return cls(n, factors=tuple(np.eye(2) for _ in range(n)))

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.full is not None:
            return self.full
        return reduce(np.kron, self.factors)

    @cached_property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))


def calibrate(
    noise: NoiseModel,
    n: int,
    shots: int | None = None,
    seed: int = 0,
) -> ConfusionMatrix:
    """Confusion matrix of the model's readout.

    ``shots=None`` returns the exact Kronecker product of the per-qubit
    matrices; otherwise each column is sampled from a prepared basis state.
    """
    if shots is None:
        return ConfusionMatrix(n, factors=tuple(noise.readout_matrix(q) for q in range(n)))
    if shots < 1:
        raise ConfigError(f"Calibration needs at least one shot, got {shots}")
    dim = 2 ** n
    columns = []
    for b in range(dim):
        prep = Circuit(n, tuple(x(q) for q in range(n) if (b >> (n - 1 - q)) & 1))
        probs = distribution(run_statevector(prep), None, noise)
        result = sample_distribution(probs, n, shots, derive_seed(seed, "calibration", b))
        columns.append(result.probabilities(n))
    logger.info(f"Calibrated {n}-qubit readout with {shots} shots per basis state")
    return ConfusionMatrix(n, full=np.column_stack(columns))


def mitigate_counts(
    confusion: ConfusionMatrix,
    observed: ShotResult | np.ndarray,
    method: MitigationMethod = "square",
) -> np.ndarray:
    """Solve M p = p_observed for the prepared distribution.

    ``square`` keeps the direct solution when it is already a distribution and
    otherwise minimizes |M p - p_observed|^2 over the probability simplex;
    ``inverse`` returns the raw quasi-distribution.

    Raises:
        SingularConfusionError: If cond(M) exceeds 1e12
        DimensionError: If the distribution does not match M
    """
    n = confusion.n
    probs = observed.probabilities(n) if isinstance(observed, ShotResult) else np.asarray(observed, dtype=float)
    if probs.size != 2 ** n:
        raise DimensionError(f"Distribution of size {probs.size} does not match a {n}-qubit confusion matrix")
    if confusion.condition_number > MAX_CONDITION:
        raise SingularConfusionError(
            "Confusion matrix is numerically singular",
            details={"condition_number": confusion.condition_number},
        )
    mat = confusion.matrix
    direct = np.linalg.solve(mat, probs)
    if method == "inverse":
        return direct
    if direct.min() >= -1e-12:
        clipped = np.clip(direct, 0.0, None)
        return clipped / clipped.sum()

    start = np.clip(direct, 0.0, None)
    start = start / start.sum() if start.sum() > 0 else np.full(probs.size, 1.0 / probs.size)
    result = scipy.optimize.minimize(
        lambda p: float(np.sum((probs - mat @ p) ** 2)),
        start,
        jac=lambda p: 2 * mat.T @ (mat @ p - probs),
        method="SLSQP",
        bounds=[(0.0, 1.0)] * probs.size,
        constraints={"type": "eq", "fun": lambda p: 1.0 - np.sum(p)},
        options={"ftol": 1e-14, "maxiter": 500},
    )
    logger.debug(f"Constrained mitigation: {result.message}")
    solution = np.clip(result.x, 0.0, None)
    return solution / solution.sum()


# --- Extrapolation ------------------------------------------------------------


@dataclass(frozen=True)
class ExtrapolationResult:
    """Linear fit A(r) = intercept + slope * r, evaluated at r = 0."""

    intercept: float
    slope: float
    residual: float
    points: tuple[tuple[float, float], ...]

    def as_dict(self) -> dict:
        return {
            "intercept": self.intercept,
            "slope": self.slope,
            "residual": self.residual,
            "points": [list(p) for p in self.points],
        }


def noise_scale(k: int) -> int:
    """r = 2k + 1 for a circuit with every CNOT folded k times."""
    return 2 * k + 1


def richardson(points: Sequence[tuple[float, float]]) -> ExtrapolationResult:
    """Least-squares line through (r, A) points.

    Raises:
        ConfigError: With fewer than two points or repeated r values
    """
    pts = tuple((float(r), float(a)) for r, a in points)
    rs = [r for r, _ in pts]
    if len(pts) < 2:
        raise ConfigError(f"Extrapolation needs at least two points, got {len(pts)}")
    if len(set(rs)) != len(rs):
        raise ConfigError(f"Extrapolation points repeat a noise scale: {rs}")
    r = np.array(rs)
    a = np.array([v for _, v in pts])
    slope, intercept = np.polyfit(r, a, 1)
    residual = float(np.sqrt(np.mean((a - (intercept + slope * r)) ** 2)))
    return ExtrapolationResult(float(intercept), float(slope), residual, pts)


@dataclass(frozen=True)
class MitigatedEstimate:
    raw: float
    em: float
    em_re: float
    extrapolation: ExtrapolationResult

    def as_dict(self) -> dict:
        return {
            "raw": self.raw,
            "em": self.em,
            "em_re": self.em_re,
            "slope": self.extrapolation.slope,
            "points": [list(p) for p in self.extrapolation.points],
        }


def _estimates_at(
    obs: ObservableSum,
    circuit: Circuit,
    noise: NoiseModel,
    confusion: ConfusionMatrix,
    k: int,
    shots: int | None,
    seed: int,
    method: MitigationMethod,
) -> tuple[float, float]:
    """(raw, mitigated) estimate of ``obs`` on the k-times folded circuit."""
    rho = run_density(fold_cnots(circuit, k), noise)
    raw = em = 0.0
    for setting in grouping(obs):
        probs = distribution(rho, setting.basis_change(), noise)
        if shots is not None:
            result = sample_distribution(probs, obs.n, shots, derive_seed(seed, "fold", k, "setting", setting.basis))
            probs = result.probabilities(obs.n)
        raw += setting.estimate(probs)
        em += setting.estimate(mitigate_counts(confusion, probs, method))
    return raw, em


def mitigated_expectation(
    obs: ObservableSum,
    circuit: Circuit,
    noise: NoiseModel,
    ks: Sequence[int] = DEFAULT_KS,
    shots: int | None = None,
    seed: int = 0,
    confusion: ConfusionMatrix | None = None,
    method: MitigationMethod = "square",
    workers: int = 1,
    extrapolate: bool = True,
) -> MitigatedEstimate:
    """Raw, readout-mitigated, and mitigated-plus-extrapolated expectation of ``obs``.

    ``shots=None`` uses exact outcome distributions; otherwise every folded
    circuit and measurement setting draws from its own derived seed. Raw and
    mitigated values are taken from the unfolded circuit. With
    ``extrapolate=False`` only the unfolded circuit runs and em_re equals em.
    """
    if obs.n != circuit.n_qubits:
        raise DimensionError(f"Observable on {obs.n} qubits, circuit on {circuit.n_qubits}")
    ks = sorted(set(int(k) for k in ks)) if extrapolate else [0]
    if confusion is None:
        confusion = calibrate(noise, obs.n, shots, derive_seed(seed, "calibration"))
    needed = sorted(set(ks) | {0})

    def run(k: int) -> tuple[float, float]:
        return _estimates_at(obs, circuit, noise, confusion, k, shots, seed, method)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = dict(zip(needed, pool.map(run, needed)))
    else:
        values = {k: run(k) for k in needed}

    raw, em = values[0]
    if extrapolate:
        extrapolation = richardson([(noise_scale(k), values[k][1]) for k in ks])
    else:
        extrapolation = ExtrapolationResult(em, 0.0, 0.0, ((float(noise_scale(0)), em),))
    logger.info(f"raw={raw:.6f} em={em:.6f} em_re={extrapolation.intercept:.6f} over ks={ks}")
    return MitigatedEstimate(raw=raw, em=em, em_re=extrapolation.intercept, extrapolation=extrapolation)
