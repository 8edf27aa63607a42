"""Tests for readout calibration, constrained unfolding and noise extrapolation."""
import numpy as np
import pytest

from spin_circuits.circuit import Circuit, x
from spin_circuits.models.simulation import NoiseModel
from spin_circuits.mitigation import (
    ConfusionMatrix,
    calibrate,
    mitigate_counts,
    mitigated_expectation,
    noise_scale,
    richardson,
)
from spin_circuits.pauli import total_sz
from spin_circuits.simulator import sample_distribution
from spin_circuits.synthesis import erc_chain, parse_labels
from spin_circuits.utils.errors import ConfigError, DimensionError, SingularConfusionError

SKEWED = ConfusionMatrix(1, full=np.array([[0.9, 0.2], [0.1, 0.8]]))
W_STATE = erc_chain(parse_labels("l01=1,l=3/2,m=-1/2"))


def test_confusion_matrix_validation():
    with pytest.raises(ConfigError):
        ConfusionMatrix(1)
    with pytest.raises(ConfigError):
        ConfusionMatrix(1, full=np.array([[0.9, 0.2], [0.2, 0.9]]))
    with pytest.raises(DimensionError):
        ConfusionMatrix(2, factors=(np.eye(2),))
    np.testing.assert_allclose(ConfusionMatrix.identity(2).matrix, np.eye(4))


def test_exact_calibration_is_a_kronecker_product(default_noise):
    confusion = calibrate(default_noise, 2)
    single = np.array([[0.98, 0.02], [0.02, 0.98]])
    np.testing.assert_allclose(confusion.matrix, np.kron(single, single))


def test_sampled_calibration_is_close(default_noise):
    confusion = calibrate(default_noise, 2, shots=20000, seed=3)
    np.testing.assert_allclose(confusion.matrix.sum(axis=0), 1.0)
    np.testing.assert_allclose(confusion.matrix, calibrate(default_noise, 2).matrix, atol=0.01)
    assert np.array_equal(confusion.matrix, calibrate(default_noise, 2, shots=20000, seed=3).matrix)


def test_square_method_stays_on_the_simplex():
    """A negative direct solution is replaced by the nearest distribution."""
    observed = np.array([0.95, 0.05])
    np.testing.assert_allclose(mitigate_counts(SKEWED, observed, "inverse"), [1.0714286, -0.0714286], atol=1e-6)
    np.testing.assert_allclose(mitigate_counts(SKEWED, observed, "square"), [1.0, 0.0], atol=1e-6)


def test_square_method_keeps_valid_direct_solution():
    observed = SKEWED.matrix @ np.array([0.6, 0.4])
    np.testing.assert_allclose(mitigate_counts(SKEWED, observed), [0.6, 0.4], atol=1e-12)


def test_inverse_method_recovers_sampled_distribution(default_noise):
    """Unfolding shot counts lands within a few standard errors of the truth."""
    truth = np.array([0.7, 0.3])
    confusion = calibrate(default_noise, 1)
    observed = sample_distribution(confusion.matrix @ truth, 1, 100000, seed=8)
    np.testing.assert_allclose(mitigate_counts(confusion, observed, "inverse"), truth, atol=0.01)


def test_mitigation_errors():
    singular = ConfusionMatrix(1, full=np.array([[0.5, 0.5], [0.5, 0.5]]))
    with pytest.raises(SingularConfusionError):
        mitigate_counts(singular, np.array([0.5, 0.5]))
    with pytest.raises(DimensionError):
        mitigate_counts(SKEWED, np.array([0.25] * 4))


def test_richardson_line():
    fit = richardson([(1, 0.9), (3, 0.7), (5, 0.5)])
    assert fit.intercept == pytest.approx(1.0)
    assert fit.slope == pytest.approx(-0.1)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)


def test_richardson_errors():
    with pytest.raises(ConfigError):
        richardson([(1, 0.5)])
    with pytest.raises(ConfigError):
        richardson([(1, 0.5), (1, 0.4)])


def test_richardson_ignores_point_order():
    points = [(1, 0.83), (3, 0.61), (5, 0.52), (7, 0.40)]
    fit = richardson(points)
    for order in ([3, 1, 0, 2], [2, 3, 1, 0]):
        shuffled = richardson([points[i] for i in order])
        assert shuffled.intercept == pytest.approx(fit.intercept, abs=1e-12)
        assert shuffled.slope == pytest.approx(fit.slope, abs=1e-12)
        assert shuffled.residual == pytest.approx(fit.residual, abs=1e-12)


@pytest.mark.parametrize("scale,offset", [(2.0, 0.5), (-0.75, 3.0)])
def test_richardson_follows_affine_maps(scale, offset):
    points = [(1, 0.83), (3, 0.61), (5, 0.52)]
    fit = richardson(points)
    mapped = richardson([(r, scale * a + offset) for r, a in points])
    assert mapped.intercept == pytest.approx(scale * fit.intercept + offset, abs=1e-12)
    assert mapped.slope == pytest.approx(scale * fit.slope, abs=1e-12)
    assert mapped.residual == pytest.approx(abs(scale) * fit.residual, abs=1e-12)


def test_noise_scale():
    assert [noise_scale(k) for k in (0, 1, 2)] == [1, 3, 5]


def test_noiseless_estimate_is_exact():
    estimate = mitigated_expectation(total_sz(3), W_STATE, NoiseModel.noiseless())
    assert estimate.raw == pytest.approx(-0.5)
    assert estimate.em == pytest.approx(-0.5)
    assert estimate.em_re == pytest.approx(-0.5)


def test_readout_mitigation_removes_readout_bias():
    """With readout error only, exact-mode mitigation restores <S_z>."""
    noise = NoiseModel(readout=[[[0.95, 0.05], [0.05, 0.95]]])
    estimate = mitigated_expectation(total_sz(1), Circuit(1, (x(0),)), noise, extrapolate=False)
    assert estimate.raw == pytest.approx(-0.45)
    assert estimate.em == pytest.approx(-0.5)
    assert estimate.em_re == estimate.em


def test_extrapolation_beats_raw(gate_noise):
    """Folding and a linear fit move <S_z> closer to the noiseless value."""
    estimate = mitigated_expectation(total_sz(3), W_STATE, gate_noise)
    assert abs(estimate.em_re + 0.5) <= abs(estimate.raw + 0.5) + 1e-9
    assert estimate.extrapolation.slope > 0
    assert [p[0] for p in estimate.extrapolation.points] == [1.0, 3.0, 5.0]


def test_shot_estimates_repeat_and_ignore_workers(default_noise):
    kwargs = dict(ks=(0, 1), shots=2000, seed=21)
    serial = mitigated_expectation(total_sz(3), W_STATE, default_noise, **kwargs)
    threaded = mitigated_expectation(total_sz(3), W_STATE, default_noise, workers=2, **kwargs)
    assert serial.as_dict() == threaded.as_dict()


def test_register_mismatch():
    with pytest.raises(DimensionError):
        mitigated_expectation(total_sz(2), W_STATE, NoiseModel.noiseless())
