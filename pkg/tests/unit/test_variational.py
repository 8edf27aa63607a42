"""Tests for the spin-penalty cost, the ansatz families and the optimizer."""
import numpy as np
import pytest
import scipy.linalg

from fixtures.oracle_states import CHAIN3_STATES, ket, phase_overlap
from spin_circuits.circuit import Circuit, equal_up_to_phase, unitary_of
from spin_circuits.pauli import PauliString, total_sz
from spin_circuits.simulator import StateVector, run_statevector
from spin_circuits.spin import bowtie_tree
from spin_circuits.synthesis import parse_labels
from spin_circuits.utils.errors import ConfigError, DimensionError, LabelError
from spin_circuits.variational import (
    CostSpec,
    RyAnsatz,
    TimeEvoAnsatz,
    cost,
    estimate_cost,
    expectation_values,
    gradient,
    heisenberg_block,
    initial_state_for,
    optimize,
    starting_points,
)

DOUBLET = CostSpec.for_chain(parse_labels("l01=0,l=1/2,m=1/2"))


def _basis(index, n):
    psi = np.zeros(2 ** n)
    psi[index] = 1.0
    return StateVector.from_amplitudes(psi)


# --- Cost ----------------------------------------------------------------------


def test_cost_of_all_up_state():
    """|000> misses S_z by 1, S^2 by 3 and the pair spin by 2."""
    np.testing.assert_allclose(expectation_values(DOUBLET, _basis(0, 3)), [1.5, 3.75, 2.0])
    assert cost(DOUBLET, _basis(0, 3)) == pytest.approx(14.0)


@pytest.mark.parametrize("oracle", CHAIN3_STATES, ids=lambda o: o.labels)
def test_cost_vanishes_on_targets(oracle):
    spec = CostSpec.for_chain(parse_labels(oracle.labels))
    assert cost(spec, StateVector.from_amplitudes(oracle.amplitudes)) == pytest.approx(0.0, abs=1e-20)


def test_cost_on_density_matrix_agrees():
    psi = StateVector.from_amplitudes(CHAIN3_STATES[2].amplitudes)
    assert cost(DOUBLET, psi.density()) == pytest.approx(cost(DOUBLET, psi))


def test_cost_checks_register():
    with pytest.raises(DimensionError):
        cost(DOUBLET, _basis(0, 2))


def test_cost_spec_validation():
    with pytest.raises(LabelError):
        CostSpec(3, "5/2", "1/2")
    with pytest.raises(LabelError):
        CostSpec(3, "1/2", "1/2", (((0, 1), "1/2"),))
    with pytest.raises(ConfigError):
        CostSpec(3, "1/2", "1/2", (((0, 1), 0), ((1, 0), 1)))
    with pytest.raises(ConfigError):
        CostSpec(3, "1/2", "1/2", (((0, 3), 0),))


def test_cost_spec_for_tree_uses_every_inner_node():
    spec = CostSpec.for_tree(bowtie_tree(0, "1/2", 1, "1/2"), "-1/2")
    assert spec.n == 5
    assert [q for q, _ in spec.subsets] == [(0, 1), (0, 1, 2), (3, 4)]
    assert len(spec.observables) == 5


def test_estimate_cost_is_seeded():
    """Shot costs repeat for a seed and sit near the exact cost."""
    state = _basis(0, 3)
    first = estimate_cost(DOUBLET, state, 20000, seed=4)
    assert estimate_cost(DOUBLET, state, 20000, seed=4) == first
    assert first == pytest.approx(14.0, abs=0.5)


# --- Ansatze -------------------------------------------------------------------


@pytest.mark.parametrize("angles", [(0.3, -0.8, 1.1), (0.0, 0.0, 0.0), (2.5, 1.0, -3.0)])
def test_heisenberg_block_matches_exponential(angles):
    tx, ty, tz = angles
    generator = sum(
        t * PauliString.from_label(p).to_matrix() for t, p in zip(angles, ("XX", "YY", "ZZ"))
    )
    expected = scipy.linalg.expm(-0.5j * generator)
    actual = unitary_of(Circuit(2, tuple(heisenberg_block(0, 1, tx, ty, tz))))
    assert equal_up_to_phase(actual, expected)


def _commutator_with_sz(angles):
    unitary = unitary_of(Circuit(3, tuple(heisenberg_block(0, 2, *angles))))
    sz = total_sz(3).matrix
    return np.linalg.norm(unitary @ sz - sz @ unitary)


def test_heisenberg_block_conserves_sz_for_equal_xy_angles():
    rng = np.random.default_rng(5)
    for _ in range(10):
        t_xy, t_z = rng.uniform(-np.pi, np.pi, 2)
        assert _commutator_with_sz((t_xy, t_xy, t_z)) <= 1e-12


def test_heisenberg_block_mixes_sz_for_unequal_xy_angles():
    assert _commutator_with_sz((0.3, 1.1, 0.7)) > 0.1


def test_time_evolution_keeps_sz_on_the_equal_angle_slice():
    labels = parse_labels("l01=1,l=3/2,m=1/2")
    ansatz = TimeEvoAnsatz(3, reps=2, initial=initial_state_for(labels))
    rng = np.random.default_rng(8)
    for _ in range(5):
        params = rng.uniform(0, 2 * np.pi, ansatz.n_params).reshape(-1, 3)
        params[:, 1] = params[:, 0]
        state = run_statevector(ansatz.build(params.reshape(-1)))
        assert expectation_values(CostSpec(3, "3/2", "1/2"), state)[0] == pytest.approx(0.5, abs=1e-12)


def test_ry_ansatz_layout():
    ansatz = RyAnsatz(3, reps=2)
    assert ansatz.n_params == 9
    circuit = ansatz.build(np.zeros(9))
    assert sum(1 for g in circuit if len(g.qubits) == 2) == 4
    with pytest.raises(ConfigError):
        ansatz.build(np.zeros(8))
    with pytest.raises(ConfigError):
        RyAnsatz(3, edges=((0, 0),))


def test_time_evolution_ansatz_layout():
    """The first repetition skips the intra-block couplings."""
    ansatz = TimeEvoAnsatz(3, reps=2)
    assert ansatz.blocks == [(0, 2), (1, 2), (0, 1), (0, 2), (1, 2)]
    assert ansatz.n_params == 15
    with pytest.raises(DimensionError):
        TimeEvoAnsatz(3, initial=Circuit(2))
    with pytest.raises(ConfigError):
        TimeEvoAnsatz(3, reps=0)


def test_zero_parameters_leave_the_initial_state():
    labels = parse_labels("l01=1,l=3/2,m=1/2")
    ansatz = TimeEvoAnsatz(3, reps=2, initial=initial_state_for(labels))
    start = run_statevector(initial_state_for(labels)).amplitudes
    psi = run_statevector(ansatz.build(np.zeros(ansatz.n_params))).amplitudes
    assert phase_overlap(psi, start) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("l01=1,l=3/2,m=1/2", ket({"010": 1 / np.sqrt(2), "100": 1 / np.sqrt(2)})),
        ("l01=0,l=1/2,m=1/2", CHAIN3_STATES[1].amplitudes),
        ("l01=1,l=3/2,m=-3/2", ket({"111": 1.0})),
    ],
)
def test_initial_state_for(text, expected):
    """n-1 spins carry m -/+ 1/2 and the last spin is up or down."""
    psi = run_statevector(initial_state_for(parse_labels(text))).amplitudes
    assert phase_overlap(psi, expected) == pytest.approx(1.0)


def test_initial_state_needs_two_spins():
    with pytest.raises(ConfigError):
        initial_state_for(parse_labels("l=1/2,m=1/2"))


# --- Gradient and optimization ------------------------------------------------


def test_parameter_shift_matches_finite_differences():
    ansatz = RyAnsatz(3, reps=1)
    params = np.random.default_rng(2).uniform(0, 2 * np.pi, ansatz.n_params)
    grad = gradient(DOUBLET, ansatz, params)
    step = 1e-6
    for p in range(params.size):
        up, down = params.copy(), params.copy()
        up[p] += step
        down[p] -= step
        numeric = (cost(DOUBLET, run_statevector(ansatz.build(up)))
                   - cost(DOUBLET, run_statevector(ansatz.build(down)))) / (2 * step)
        assert grad[p] == pytest.approx(numeric, abs=1e-5)


def test_starting_points_are_seeded():
    ansatz = RyAnsatz(2)
    first = starting_points(ansatz, 5, 3)
    second = starting_points(ansatz, 5, 3)
    assert all(np.array_equal(a, b) for a, b in zip(first, second))
    assert all(((s >= 0) & (s < 2 * np.pi)).all() for s in first)
    pinned = starting_points(ansatz, 5, 3, initial_params=[0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(pinned[0], [0.1, 0.2, 0.3, 0.4])


def test_optimize_from_exact_start():
    """Starting at the target, the optimizer stays there."""
    labels = parse_labels("l01=0,l=1/2,m=1/2")
    ansatz = TimeEvoAnsatz(3, reps=1, initial=initial_state_for(labels))
    target = StateVector.from_amplitudes(CHAIN3_STATES[1].amplitudes)
    result = optimize(DOUBLET, ansatz, seed=1, restarts=1, initial_params=np.zeros(ansatz.n_params),
                      target=target)
    assert result.cost == pytest.approx(0.0, abs=1e-12)
    assert result.fidelity == pytest.approx(1.0)
    assert result.trace[0] == pytest.approx(0.0, abs=1e-12)


def test_optimize_validation():
    with pytest.raises(ConfigError):
        optimize(DOUBLET, RyAnsatz(3), seed=1, restarts=0)
    with pytest.raises(DimensionError):
        optimize(DOUBLET, RyAnsatz(2), seed=1, restarts=1)


def test_optimize_is_independent_of_workers():
    spec = CostSpec(2, 1, 0)
    ansatz = RyAnsatz(2, reps=1)
    serial = optimize(spec, ansatz, seed=11, restarts=3, max_iters=15)
    threaded = optimize(spec, ansatz, seed=11, restarts=3, max_iters=15, workers=3)
    assert serial.restart == threaded.restart
    np.testing.assert_allclose(serial.params, threaded.params)


@pytest.mark.slow
def test_ry_ansatz_reaches_triplet():
    spec = CostSpec(2, 1, 0)
    target = StateVector.from_amplitudes([0, 1, 1, 0])
    result = optimize(spec, RyAnsatz(2, reps=1), seed=3, restarts=4, target=target)
    assert result.cost < 1e-8
    assert result.fidelity > 0.9999


def _w_type(oracle):
    """W-type targets, which the three-layer Ry ansatz does not reach."""
    return oracle.labels in ("l01=1,l=3/2,m=-1/2", "l01=1,l=3/2,m=1/2")


@pytest.mark.slow
@pytest.mark.parametrize(
    "oracle", [o for o in CHAIN3_STATES if not _w_type(o)], ids=lambda o: o.labels
)
def test_ry_ansatz_reaches_chain_targets(oracle):
    labels = parse_labels(oracle.labels)
    target = StateVector.from_amplitudes(oracle.amplitudes)
    result = optimize(CostSpec.for_chain(labels), RyAnsatz(3, reps=3), seed=0, restarts=10, target=target)
    assert result.cost <= 1e-7
    assert result.fidelity == pytest.approx(1.0, abs=1e-4)


@pytest.mark.slow
@pytest.mark.parametrize("oracle", CHAIN3_STATES, ids=lambda o: o.labels)
def test_time_evolution_reaches_chain_targets(oracle):
    labels = parse_labels(oracle.labels)
    spec = CostSpec.for_chain(labels)
    ansatz = TimeEvoAnsatz(3, reps=2, initial=initial_state_for(labels))
    target = StateVector.from_amplitudes(oracle.amplitudes)
    result = optimize(spec, ansatz, seed=0, restarts=10, target=target)
    assert result.cost <= 1e-12
    assert result.fidelity > 0.9999
    assert expectation_values(spec, result.state)[0] == pytest.approx(labels.m.value, abs=1e-6)


def _random_instance(kind, index):
    rng = np.random.default_rng([17, index])
    oracle = CHAIN3_STATES[int(rng.integers(len(CHAIN3_STATES)))]
    labels = parse_labels(oracle.labels)
    if kind == "ry":
        ansatz = RyAnsatz(3, reps=int(rng.integers(1, 4)))
    else:
        ansatz = TimeEvoAnsatz(3, reps=int(rng.integers(1, 3)), initial=initial_state_for(labels))
    return CostSpec.for_chain(labels), ansatz, rng.uniform(0, 2 * np.pi, ansatz.n_params)


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["ry", "timeevo"])
def test_gradient_matches_finite_differences_on_random_instances(kind):
    step = 1e-6
    for index in range(50):
        spec, ansatz, params = _random_instance(kind, index)
        grad = gradient(spec, ansatz, params)
        for p in range(params.size):
            up, down = params.copy(), params.copy()
            up[p] += step
            down[p] -= step
            numeric = (cost(spec, run_statevector(ansatz.build(up)))
                       - cost(spec, run_statevector(ansatz.build(down)))) / (2 * step)
            assert grad[p] == pytest.approx(numeric, abs=1e-6), (index, p)
