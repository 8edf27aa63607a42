"""Tests for the pydantic wire models."""
import numpy as np
import pytest
from pydantic import ValidationError

from spin_circuits.circuit import Circuit, Polarity, cnot, equal_up_to_phase, ry, unitary, unitary_of, x
from spin_circuits.models.circuit import CircuitModel, CouplingTreeModel, GateModel, ObservableTermModel
from spin_circuits.models.reports import EstimateReport, GateCountRow, OptimizationReport, TomographyReport
from spin_circuits.pauli import total_s2
from spin_circuits.spin import bowtie_tree


def test_gate_model_nests_controlled_gates():
    gate = ry(0, 0.5).controlled(2, Polarity.ON_ZERO)
    model = GateModel.from_gate(gate)
    assert model.kind == "controlled"
    assert model.polarity == "zero"
    assert model.base.angle == pytest.approx(0.5)
    assert model.to_gate() == gate


def test_circuit_model_round_trip():
    circuit = Circuit(3, (x(0), cnot(0, 1), unitary((2,), np.array([[0, 1j], [1j, 0]]))))
    restored = CircuitModel.model_validate_json(CircuitModel.from_circuit(circuit).model_dump_json()).to_circuit()
    assert equal_up_to_phase(unitary_of(restored), unitary_of(circuit))


def test_circuit_model_rejects_negative_register():
    with pytest.raises(ValidationError):
        CircuitModel(n=-1)


def test_coupling_tree_model_round_trip():
    tree = bowtie_tree(1, "3/2", 1, "5/2")
    model = CouplingTreeModel.from_tree(tree)
    assert model.l == "5/2"
    assert model.to_tree() == tree


def test_observable_terms_round_trip():
    obs = total_s2(3)
    terms = ObservableTermModel.from_observable(obs)
    np.testing.assert_allclose(ObservableTermModel.to_observable(terms).matrix, obs.matrix)
    with pytest.raises(ValidationError):
        ObservableTermModel(coeff=1.0, pauli="XQ")


def test_report_models_validate():
    OptimizationReport(params=[0.1], cost=0.0, iterations=3, trace=[1.0, 0.0], seed=1, restart=0, converged=True)
    with pytest.raises(ValidationError):
        OptimizationReport(params=[], cost=-1.0, iterations=0, trace=[], seed=0, restart=0, converged=False)
    EstimateReport(observable="Sz", exact=-0.5, raw=-0.45, em=-0.5, em_re=-0.5, slope=0.01,
                   points=[[1.0, -0.5], [3.0, -0.48]])
    assert TomographyReport(fidelity_raw=0.9, fidelity_projected=0.9, purity=0.8, settings=27).shots_per_setting is None
    with pytest.raises(ValidationError):
        GateCountRow(n=1, model_cnot=0, model_single=0, labelings=0)
