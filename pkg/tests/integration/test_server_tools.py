"""Tests for the MCP tool functions and the server lifespan."""
import json

import pytest
from pydantic import ValidationError

from fixtures.oracle_states import CHAIN3_STATES
from spin_circuits import server
from spin_circuits.config import Settings
from spin_circuits.models.simulation import NoiseModel
from spin_circuits.utils.errors import ConfigError

W_TARGET = CHAIN3_STATES[5].labels


@pytest.mark.asyncio
async def test_lifespan_loads_settings_and_noise(monkeypatch, tmp_path):
    path = tmp_path / "noise.json"
    path.write_text(json.dumps({"p1": 0.0, "p2": 0.03}))
    monkeypatch.setenv("SPIN_CIRCUITS_NOISE", str(path))
    async with server.spin_lifespan(server.mcp) as context:
        assert isinstance(context["settings"], Settings)
        assert context["settings"].threads == 1
        assert context["noise"] == NoiseModel(p2=0.03)


@pytest.mark.asyncio
async def test_lifespan_falls_back_to_packaged_noise():
    async with server.spin_lifespan(server.mcp) as context:
        assert context["noise"] == NoiseModel.default()


@pytest.mark.asyncio
async def test_lifespan_propagates_bad_settings(monkeypatch):
    monkeypatch.setenv("SPIN_CIRCUITS_THREADS", "none")
    with pytest.raises(ConfigError):
        async with server.spin_lifespan(server.mcp):
            pass


@pytest.mark.asyncio
async def test_list_spin_labelings(mcp_context):
    rows = await server.list_spin_labelings(mcp_context)
    assert [r["labels"] for r in rows] == [s.labels for s in CHAIN3_STATES]
    bowtie = await server.list_spin_labelings(mcp_context, system="bowtie-5")
    assert len(bowtie) == 32


@pytest.mark.asyncio
async def test_list_spin_labelings_rejects_unknown_system(mcp_context):
    with pytest.raises(ConfigError):
        await server.list_spin_labelings(mcp_context, system="ladder-4")


@pytest.mark.asyncio
async def test_prepare_spin_state(mcp_context):
    result = await server.prepare_spin_state(W_TARGET, mcp_context)
    assert result["labels"] == W_TARGET
    assert result["fidelity"] == pytest.approx(1.0)
    assert result["optimization"] is None
    assert result["circuit"]["n"] == 3
    assert result["counts"]["cnot"] > 0
    json.dumps(result)


@pytest.mark.asyncio
async def test_prepare_spin_state_rejects_bad_labels(mcp_context):
    with pytest.raises(ValidationError):
        await server.prepare_spin_state("l01=1,l=5/2,m=1/2", mcp_context)


@pytest.mark.asyncio
async def test_optimize_spin_state(mcp_context):
    result = await server.optimize_spin_state(CHAIN3_STATES[7].labels, mcp_context, depth=1, restarts=1,
                                              max_iters=5, seed=4)
    assert result["method"] == "vqe-ry"
    assert len(result["params"]) > 0
    assert result["trace"][-1] == pytest.approx(result["cost"])
    assert 0.0 <= result["fidelity"] <= 1.0 + 1e-12


@pytest.mark.asyncio
async def test_measure_spin_observables(mcp_context):
    reports = await server.measure_spin_observables(W_TARGET, mcp_context, re=False)
    assert [r["observable"] for r in reports] == ["Sz", "S2", "S2_01"]
    for report in reports:
        assert report["em_re"] == report["em"]
        assert abs(report["em"] - report["exact"]) <= abs(report["raw"] - report["exact"]) + 1e-9


@pytest.mark.asyncio
async def test_measure_spin_observables_noise_override(mcp_context, tmp_path):
    path = tmp_path / "clean.json"
    path.write_text(NoiseModel.noiseless().model_dump_json())
    reports = await server.measure_spin_observables(W_TARGET, mcp_context, ks=[0, 1], noise_path=str(path))
    for report in reports:
        assert report["raw"] == pytest.approx(report["exact"], abs=1e-10)
        assert report["em_re"] == pytest.approx(report["exact"], abs=1e-10)


@pytest.mark.asyncio
async def test_spin_state_tomography(mcp_context):
    report = await server.spin_state_tomography(W_TARGET, mcp_context, em=True, re=True)
    assert report["settings"] == 27
    assert 0.0 < report["purity"] < 1.0
    assert report["fidelity_extrapolated"] > report["fidelity_projected"]


@pytest.mark.asyncio
async def test_gate_count_table_tool(mcp_context):
    rows = await server.gate_count_table(mcp_context, n_min=2, n_max=3)
    assert [(r["n"], r["model_cnot"], r["model_single"]) for r in rows] == [(2, 1, 2), (3, 24, 20)]
    assert rows[1]["labelings"] == 8
    with pytest.raises(ConfigError):
        await server.gate_count_table(mcp_context, n_min=4, n_max=3)
