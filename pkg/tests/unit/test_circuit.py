"""Tests for the circuit IR, native lowering and peephole passes."""
import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from spin_circuits.circuit import (
    Circuit,
    Gate,
    GateKind,
    Polarity,
    canonical_angle,
    cnot,
    control_wrap,
    counts,
    decompose_native,
    equal_up_to_phase,
    fold_cnots,
    h,
    rx,
    ry,
    rz,
    s,
    simplify,
    swap,
    t,
    toffoli,
    unitary,
    unitary_of,
    x,
    y,
    z,
    zyz_angles,
    rz_matrix,
    ry_matrix,
)
from spin_circuits.utils.errors import ConfigError, DecompositionError, DimensionError


def test_gate_validation():
    """Repeated qubits, missing angles and bad registers are refused."""
    with pytest.raises(ConfigError):
        cnot(1, 1)
    with pytest.raises(ConfigError):
        Gate(GateKind.RY, (0,))
    with pytest.raises(ConfigError):
        Circuit(2, (x(2),))


def test_qubit_zero_is_most_significant():
    """X on qubit 0 maps |00> to |10>."""
    mat = unitary_of(Circuit(2, (x(0),)))
    assert abs(mat[0b10, 0b00]) == pytest.approx(1.0)


def test_cnot_direction():
    """CNOT(0, 1) flips qubit 1 when qubit 0 is set."""
    mat = unitary_of(Circuit(2, (cnot(0, 1),)))
    assert abs(mat[0b11, 0b10]) == pytest.approx(1.0)
    assert abs(mat[0b01, 0b01]) == pytest.approx(1.0)


def test_controlled_on_zero_polarity():
    """An on-zero control acts when the control reads 0."""
    gate = x(1).controlled(0, Polarity.ON_ZERO)
    mat = unitary_of(Circuit(2, (gate,)))
    assert abs(mat[0b01, 0b00]) == pytest.approx(1.0)
    assert abs(mat[0b10, 0b10]) == pytest.approx(1.0)


def test_zyz_angles_reconstruct():
    """ZYZ angles rebuild a random single-qubit unitary."""
    u = unitary_group.rvs(2, random_state=11)
    alpha, beta, gamma, delta = zyz_angles(u)
    rebuilt = np.exp(1j * alpha) * rz_matrix(beta) @ ry_matrix(gamma) @ rz_matrix(delta)
    np.testing.assert_allclose(rebuilt, u, atol=1e-10)


@pytest.mark.parametrize(
    "gates",
    [
        (s(0), t(1), swap(0, 1)),
        (toffoli(0, 1, 2),),
        (ry(2, 0.3).controlled(0),),
        (rx(1, 1.1).controlled(2, Polarity.ON_ZERO),),
        (y(0).controlled(1), z(2).controlled(0)),
        (h(1).controlled(0),),
    ],
)
def test_decompose_native_preserves_unitary(gates):
    """Lowering keeps the circuit unitary up to global phase."""
    circuit = Circuit(3, gates)
    native = decompose_native(circuit)
    assert native.is_native
    assert equal_up_to_phase(unitary_of(native), unitary_of(circuit))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_two_qubit_unitary_lowering(seed):
    """Arbitrary two-qubit gates lower exactly through the cosine-sine split."""
    u = unitary_group.rvs(4, random_state=seed)
    circuit = Circuit(2, (unitary((0, 1), u),))
    assert equal_up_to_phase(unitary_of(decompose_native(circuit)), u)


def test_three_qubit_unitary_has_no_lowering():
    """Custom unitaries on three qubits are not decomposed."""
    circuit = Circuit(3, (unitary((0, 1, 2), np.eye(8)),))
    with pytest.raises(DecompositionError):
        decompose_native(circuit)


def test_unitary_of_refuses_large_registers():
    with pytest.raises(DimensionError):
        unitary_of(Circuit(13, ()))


def test_control_wrap_matches_block_structure():
    """Wrapping puts the circuit in the control-on block."""
    body = Circuit(3, (ry(1, 0.7), cnot(1, 2)))
    wrapped = control_wrap(body, 0)
    mat = unitary_of(wrapped)
    inner = unitary_of(Circuit(2, (ry(0, 0.7), cnot(0, 1))))
    assert equal_up_to_phase(mat[4:, 4:], inner)
    np.testing.assert_allclose(mat[:4, :4], np.eye(4), atol=1e-12)


def test_control_wrap_rejects_collision():
    with pytest.raises(ConfigError):
        control_wrap(Circuit(2, (x(0),)), 0)


def test_simplify_cancels_and_merges():
    """Adjacent inverses vanish and rotations on one axis merge."""
    circuit = Circuit(2, (x(0), x(0), ry(1, 0.2), ry(1, 0.3), cnot(0, 1), cnot(0, 1), rz(0, 0.0)))
    out = simplify(circuit)
    assert len(out) == 1
    assert out.gates[0].kind == GateKind.RY
    assert out.gates[0].angle == pytest.approx(0.5)


def test_simplify_is_a_fixed_point():
    """Running the pass twice changes nothing and keeps the unitary."""
    circuit = Circuit(2, (h(0), ry(1, 1.0), cnot(0, 1), ry(1, -1.0), ry(1, 1.0), h(0)))
    once = simplify(circuit)
    assert simplify(once) == once
    assert equal_up_to_phase(unitary_of(once), unitary_of(circuit))


def test_canonical_angle_range():
    for theta in (0.0, 2 * math.pi, -2 * math.pi, 5 * math.pi, -7.5):
        a = canonical_angle(theta)
        assert -2 * math.pi < a <= 2 * math.pi
        assert np.allclose(rz_matrix(a), rz_matrix(theta))


def test_fold_cnots_multiplies_cnot_count():
    """Each CNOT becomes 2k+1 copies, leaving the unitary unchanged."""
    circuit = Circuit(2, (h(0), cnot(0, 1), ry(1, 0.4), cnot(1, 0)))
    folded = fold_cnots(circuit, 2)
    assert counts(folded).cnot == 5 * counts(circuit).cnot
    assert equal_up_to_phase(unitary_of(folded), unitary_of(circuit))
    with pytest.raises(ConfigError):
        fold_cnots(circuit, -1)


def test_counts_depth():
    """Depth counts layers of gates sharing qubits."""
    circuit = Circuit(3, (h(0), h(1), h(2), cnot(0, 1), cnot(1, 2)))
    tally = counts(circuit)
    assert (tally.cnot, tally.single_qubit, tally.depth) == (2, 3, 3)


def test_circuit_json_round_trip():
    """Controlled and custom gates keep their matrices through JSON."""
    circuit = Circuit(3, (ry(0, 0.25), x(1).controlled(0, Polarity.ON_ZERO), unitary((2,), np.eye(2))))
    restored = Circuit.from_json(circuit.to_json())
    assert equal_up_to_phase(unitary_of(restored), unitary_of(circuit))
