import logging
from collections.abc import AsyncIterator
from contextlib import asynccontextmanager
from typing import Optional

from mcp.server.fastmcp import Context, FastMCP

from .config import Settings, configure_logging
from .models.experiment import ExperimentConfig
from .models.simulation import NoiseModel
from .tools import measurement_tools, state_tools, variational_tools

logger = logging.getLogger(__name__)


@asynccontextmanager
async def spin_lifespan(server: FastMCP) -> AsyncIterator[dict]:
    """
    Resolves Settings from the environment and loads the noise model once
    for all tool calls.
    """
    try:
        settings = Settings.from_env()
        noise = settings.load_noise()
        logger.info(f"Spin circuits server ready: threads={settings.threads}, noise p2={noise.p2}")
        yield {"settings": settings, "noise": noise}
    except Exception as e:
        logger.error(f"Failed to initialize spin circuits server: {e}")
        raise
    finally:
        logger.info("Spin circuits lifespan context manager exiting.")


mcp = FastMCP(
    "Spin Circuits Server",
    lifespan=spin_lifespan,
)


def _context(ctx: Context, noise_path: Optional[str]) -> tuple[Settings, NoiseModel]:
    lifespan = ctx.request_context.lifespan_context
    settings: Settings = lifespan["settings"]
    noise = settings.load_noise(noise_path) if noise_path else lifespan["noise"]
    return settings, noise


# --- Tool Implementations ---

@mcp.tool()
async def list_spin_labelings(ctx: Context, system: str = "chain-3", n: int | None = None) -> list[dict]:
    """List every total-spin eigenstate of a spin system.

    Args:
        ctx: MCP context
        system: chain-3, chain-n or bowtie-5
        n: Number of spins for chain-n

    Returns:
        One row per eigenstate with its label string, l and m
    """
    logger.info(f"Executing list_spin_labelings tool for system={system}")
    return state_tools.list_labelings(system, n)


@mcp.tool()
async def prepare_spin_state(
    target: str,
    ctx: Context,
    system: str = "chain-3",
    method: str = "erc",
    depth: int = 3,
    reps: int = 2,
    restarts: int = 10,
    seed: int = 0,
) -> dict:
    """Prepare a total-spin eigenstate and compare it with the exact amplitudes.

    Args:
        target: Labels such as "l01=1,l=3/2,m=-1/2" or "lL=0,lLC=1/2,lR=1,l=1/2,m=-1/2"
        ctx: MCP context
        system: chain-3, chain-n or bowtie-5
        method: erc, vqe-ry or vqe-timeevo
        depth: Ry ansatz repetitions
        reps: Time-evolution ansatz repetitions
        restarts: Optimizer restarts for variational methods
        seed: Root seed

    Returns:
        Fidelity, amplitudes, circuit JSON and compiled gate counts
    """
    logger.info(f"Executing prepare_spin_state tool for target={target}, method={method}")
    settings, _ = _context(ctx, None)
    config = ExperimentConfig(system=system, target=target, method=method, depth=depth, reps=reps,
                              restarts=restarts, seed=seed)
    return state_tools.prepare_state(config, settings.threads)


@mcp.tool()
async def optimize_spin_state(
    target: str,
    ctx: Context,
    system: str = "chain-3",
    method: str = "vqe-ry",
    depth: int = 3,
    reps: int = 2,
    restarts: int = 10,
    max_iters: int = 500,
    seed: int = 0,
) -> dict:
    """Variationally optimize an ansatz for a total-spin eigenstate.

    Args:
        target: Chain or bowtie label string
        ctx: MCP context
        system: chain-3, chain-n or bowtie-5
        method: vqe-ry or vqe-timeevo
        depth: Ry ansatz repetitions
        reps: Time-evolution ansatz repetitions
        restarts: Seeded random starts
        max_iters: Conjugate-gradient iteration limit per restart
        seed: Root seed

    Returns:
        Optimization report with parameters, cost, fidelity and cost trace
    """
    logger.info(f"Executing optimize_spin_state tool for target={target}, method={method}")
    settings, _ = _context(ctx, None)
    config = ExperimentConfig(system=system, target=target, method=method, depth=depth, reps=reps,
                              restarts=restarts, max_iters=max_iters, seed=seed)
    return variational_tools.optimization_summary(config, settings.threads)


@mcp.tool()
async def measure_spin_observables(
    target: str,
    ctx: Context,
    system: str = "chain-3",
    method: str = "erc",
    shots: int | None = None,
    ks: list[int] | None = None,
    seed: int = 0,
    em: bool = True,
    re: bool = True,
    noise_path: str | None = None,
) -> list[dict]:
    """Estimate S_z, S^2 and subset S^2 under noise with mitigation.

    Args:
        target: Chain or bowtie label string
        ctx: MCP context
        system: chain-3, chain-n or bowtie-5
        method: erc, vqe-ry or vqe-timeevo
        shots: Shots per measurement setting; omit for exact distributions
        ks: CNOT folding counts for extrapolation (default [0, 1, 2])
        seed: Root seed
        em: Apply readout-error mitigation
        re: Apply Richardson extrapolation
        noise_path: Optional NoiseModel JSON overriding the server default

    Returns:
        One estimate report per observable
    """
    logger.info(f"Executing measure_spin_observables tool for target={target}")
    settings, noise = _context(ctx, noise_path)
    config = ExperimentConfig(system=system, target=target, method=method, shots=shots,
                              ks=ks if ks is not None else [0, 1, 2], seed=seed, em=em, re=re)
    reports = measurement_tools.measure_observables(config, noise, settings.threads)
    return [r.model_dump() for r in reports]


@mcp.tool()
async def spin_state_tomography(
    target: str,
    ctx: Context,
    system: str = "chain-3",
    method: str = "erc",
    shots: int | None = None,
    ks: list[int] | None = None,
    seed: int = 0,
    em: bool = False,
    re: bool = False,
    noise_path: str | None = None,
) -> dict:
    """Full state tomography of a prepared eigenstate under noise.

    Args:
        target: Chain or bowtie label string
        ctx: MCP context
        system: chain-3, chain-n or bowtie-5
        method: erc, vqe-ry or vqe-timeevo
        shots: Shots per setting; omit for exact distributions
        ks: CNOT folding counts used when re is set
        seed: Root seed
        em: Apply readout-error mitigation per setting
        re: Also extrapolate the fidelity over folded circuits
        noise_path: Optional NoiseModel JSON overriding the server default

    Returns:
        Raw and projected fidelity, purity and setting counts
    """
    logger.info(f"Executing spin_state_tomography tool for target={target}")
    settings, noise = _context(ctx, noise_path)
    config = ExperimentConfig(system=system, target=target, method=method, shots=shots,
                              ks=ks if ks is not None else [0, 1, 2], seed=seed, em=em, re=re)
    return measurement_tools.state_tomography(config, noise, settings.threads).model_dump()


@mcp.tool()
async def gate_count_table(ctx: Context, n_min: int = 2, n_max: int = 6) -> list[dict]:
    """Compare the gate-count recursion with compiled chain circuits.

    Args:
        ctx: MCP context
        n_min: Smallest number of spins (at least 2)
        n_max: Largest number of spins

    Returns:
        One row per n with model and compiled counts
    """
    logger.info(f"Executing gate_count_table tool for n={n_min}..{n_max}")
    return [row.model_dump() for row in state_tools.gate_count_table(n_min, n_max)]


def main():
    """Entry point for the spin-circuits-server script."""
    settings = Settings.from_env()
    configure_logging("SERVER", settings.log_level)
    logger.info("Starting spin circuits MCP server...")
    mcp.run()


if __name__ == "__main__":
    # This allows running the server directly with `python -m spin_circuits.server`
    main()
