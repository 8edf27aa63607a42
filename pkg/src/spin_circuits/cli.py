"""Command-line front end.

Every experiment command builds one ExperimentConfig (config file first, then
flags), runs its pipeline and writes a versioned CSV plus a JSON provenance
sidecar. Without --out the CSV goes to stdout. Exit codes: 0 success,
2 configuration error, 3 numerical failure, 1 anything else.
"""
import logging
import sys
from typing import Any, Callable, List, Optional, Sequence

import typer

from .config import Settings, configure_logging
from .models.experiment import ExperimentConfig
from .synthesis import growth_rate
from .tools import measurement_tools, state_tools, variational_tools
from .utils.errors import ConfigError, exit_code_for
from .utils.io import render_csv, write_outputs

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="spin-circuits",
    help="Prepare, optimize and measure total-spin eigenstate circuits.",
    no_args_is_help=True,
    add_completion=False,
)

ConfigOpt = typer.Option(None, "--config", help="JSON config file whose keys mirror the flags")
SystemOpt = typer.Option(None, "--system", help="chain-3, chain-n or bowtie-5")
TargetOpt = typer.Option(None, "--target", help="Labels, e.g. l01=1,l=3/2,m=-1/2")
MethodOpt = typer.Option(None, "--method", help="erc, vqe-ry or vqe-timeevo")
DepthOpt = typer.Option(None, "--depth", help="Ry ansatz repetitions")
RepsOpt = typer.Option(None, "--reps", help="Time-evolution ansatz repetitions")
RestartsOpt = typer.Option(None, "--restarts", help="Optimizer restarts")
NoiseOpt = typer.Option(None, "--noise", help="NoiseModel JSON file")
ShotsOpt = typer.Option(None, "--shots", help="Shots per setting; omit for exact distributions")
KsOpt = typer.Option(None, "--ks", help="Comma-separated CNOT folding counts, e.g. 0,1,2")
SeedOpt = typer.Option(None, "--seed", help="Root seed")
EmOpt = typer.Option(None, "--em/--no-em", help="Readout-error mitigation")
ReOpt = typer.Option(None, "--re/--no-re", help="Richardson extrapolation")
OutOpt = typer.Option(None, "--out", help="Output CSV path; a .json sidecar is written next to it")


def parse_ks(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"--ks must be comma-separated integers, got {text!r}") from e


def parse_range(text: str) -> tuple[int, int]:
    """'2..6' or '4' to an inclusive range."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError as e:
        raise ConfigError(f"--n must look like 2..6, got {text!r}") from e


def _run(action: Callable[[], None]) -> None:
    try:
        action()
    except typer.Exit:
        raise
    except Exception as e:
        code = exit_code_for(e)
        logger.error(f"{type(e).__name__}: {e}")
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=code)


def _emit(
    command: str,
    header: Sequence[str],
    rows: List[Sequence[Any]],
    config: dict,
    seed: Optional[int],
    summary: dict,
    out: Optional[str],
) -> None:
    if out:
        csv_path, sidecar = write_outputs(out, command, header, rows, config, seed, summary)
        logger.info(f"Wrote {csv_path} and {sidecar}")
    else:
        sys.stdout.write(render_csv(command, header, rows))


def _load(config_path: Optional[str], defaults: Optional[dict] = None, **flags: Any) -> ExperimentConfig:
    if "ks" in flags:
        flags["ks"] = parse_ks(flags["ks"])
    config = ExperimentConfig.load(config_path, defaults, **flags)
    logger.info(f"Config hash {config.hash}")
    return config


@app.callback()
def root(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level")):
    """Total-spin eigenstate circuits on a dense simulator."""
    configure_logging("CLI", Settings.from_env().log_level, verbose)


@app.command("list")
def list_command(
    system: str = typer.Option("chain-3", "--system", help="chain-3, chain-n or bowtie-5"),
    n: Optional[int] = typer.Option(None, "--n", help="Number of spins for chain-n"),
    out: Optional[str] = OutOpt,
):
    """List the eigenstates of a spin system."""
    def action():
        rows = state_tools.list_labelings(system, n)
        config = {"system": system, "n": n}
        _emit("list", ["index", "labels", "n", "l", "m"],
              [[r["index"], r["labels"], r["n"], r["l"], r["m"]] for r in rows],
              config, None, {"count": len(rows)}, out)
    _run(action)


@app.command()
def prepare(
    config_path: Optional[str] = ConfigOpt,
    system: Optional[str] = SystemOpt,
    target: Optional[str] = TargetOpt,
    method: Optional[str] = MethodOpt,
    depth: Optional[int] = DepthOpt,
    reps: Optional[int] = RepsOpt,
    restarts: Optional[int] = RestartsOpt,
    seed: Optional[int] = SeedOpt,
    out: Optional[str] = OutOpt,
):
    """Prepare a target state and compare amplitudes with the exact eigenstate."""
    def action():
        config = _load(config_path, system=system, target=target, method=method, depth=depth,
                       reps=reps, restarts=restarts, seed=seed, out=out)
        result = state_tools.prepare_state(config, Settings.from_env().threads)
        rows = [[a["basis"], a["simulated"], a["simulated_imag"], a["oracle"]] for a in result["amplitudes"]]
        summary = {k: v for k, v in result.items() if k != "amplitudes"}
        _emit("prepare", ["basis", "simulated", "simulated_imag", "oracle"], rows,
              config.canonical(), config.seed, summary, config.out)
    _run(action)


@app.command()
def optimize(
    config_path: Optional[str] = ConfigOpt,
    system: Optional[str] = SystemOpt,
    target: Optional[str] = TargetOpt,
    method: Optional[str] = MethodOpt,
    depth: Optional[int] = DepthOpt,
    reps: Optional[int] = RepsOpt,
    restarts: Optional[int] = RestartsOpt,
    seed: Optional[int] = SeedOpt,
    out: Optional[str] = OutOpt,
):
    """Variationally optimize an ansatz for the target state."""
    def action():
        config = _load(config_path, {"method": "vqe-ry"}, system=system, target=target, method=method,
                       depth=depth, reps=reps, restarts=restarts, seed=seed, out=out)
        summary = variational_tools.optimization_summary(config, Settings.from_env().threads)
        rows = [[i, c] for i, c in enumerate(summary["trace"])]
        _emit("optimize", ["iteration", "cost"], rows, config.canonical(), config.seed, summary, config.out)
    _run(action)


@app.command()
def measure(
    config_path: Optional[str] = ConfigOpt,
    system: Optional[str] = SystemOpt,
    target: Optional[str] = TargetOpt,
    method: Optional[str] = MethodOpt,
    depth: Optional[int] = DepthOpt,
    reps: Optional[int] = RepsOpt,
    restarts: Optional[int] = RestartsOpt,
    noise: Optional[str] = NoiseOpt,
    shots: Optional[int] = ShotsOpt,
    ks: Optional[str] = KsOpt,
    seed: Optional[int] = SeedOpt,
    em: Optional[bool] = EmOpt,
    re: Optional[bool] = ReOpt,
    out: Optional[str] = OutOpt,
):
    """Estimate the spin observables under noise: raw, mitigated and extrapolated."""
    def action():
        config = _load(config_path, system=system, target=target, method=method, depth=depth, reps=reps,
                       restarts=restarts, noise=noise, shots=shots, ks=ks, seed=seed, em=em, re=re, out=out)
        settings = Settings.from_env()
        reports = measurement_tools.measure_observables(config, settings.load_noise(config.noise), settings.threads)
        rows = []
        for report in reports:
            for estimator in ("raw", "em", "em_re"):
                rows.append([config.target, report.observable, estimator, getattr(report, estimator), report.exact])
        summary = {"estimates": [r.model_dump() for r in reports]}
        _emit("measure", ["state", "observable", "estimator", "value", "exact"], rows,
              config.canonical(), config.seed, summary, config.out)
    _run(action)


@app.command()
def tomo(
    config_path: Optional[str] = ConfigOpt,
    system: Optional[str] = SystemOpt,
    target: Optional[str] = TargetOpt,
    method: Optional[str] = MethodOpt,
    depth: Optional[int] = DepthOpt,
    reps: Optional[int] = RepsOpt,
    restarts: Optional[int] = RestartsOpt,
    noise: Optional[str] = NoiseOpt,
    shots: Optional[int] = ShotsOpt,
    ks: Optional[str] = KsOpt,
    seed: Optional[int] = SeedOpt,
    em: Optional[bool] = EmOpt,
    re: Optional[bool] = ReOpt,
    out: Optional[str] = OutOpt,
):
    """Full state tomography: fidelity and purity of the prepared state."""
    def action():
        config = _load(config_path, {"re": False}, system=system, target=target, method=method, depth=depth,
                       reps=reps, restarts=restarts, noise=noise, shots=shots, ks=ks, seed=seed, em=em, re=re,
                       out=out)
        settings = Settings.from_env()
        report = measurement_tools.state_tomography(config, settings.load_noise(config.noise), settings.threads)
        metrics = ("fidelity_raw", "fidelity_projected", "purity", "fidelity_extrapolated")
        rows = [[config.target, m, getattr(report, m)] for m in metrics if getattr(report, m) is not None]
        _emit("tomo", ["state", "metric", "value"], rows, config.canonical(), config.seed,
              report.model_dump(), config.out)
    _run(action)


@app.command()
def gatecount(
    n: str = typer.Option("2..6", "--n", help="Range of spin counts, e.g. 2..6"),
    out: Optional[str] = OutOpt,
):
    """Gate-count recursion versus compiled chain circuits."""
    def action():
        lo, hi = parse_range(n)
        rows = state_tools.gate_count_table(lo, hi)
        header = ["n", "model_cnot", "model_single", "compiled_cnot_max", "compiled_single_max", "labelings"]
        config = {"n": n}
        summary = {"growth_rate": growth_rate()}
        _emit("gatecount", header, [[getattr(r, h) for h in header] for r in rows], config, None, summary, out)
    _run(action)


@app.command()
def serve():
    """Run the MCP server on stdio."""
    from .server import mcp

    logger.info("Starting spin circuits MCP server from the CLI")
    mcp.run()


def main():
    """Entry point for the spin-circuits script."""
    app()


if __name__ == "__main__":
    main()
