"""Runtime settings resolved from the environment.

Environment Variables:
    SPIN_CIRCUITS_THREADS: Worker count for optimizer restarts and folded runs (default 1)
    SPIN_CIRCUITS_NOISE: Path to a NoiseModel JSON used when no noise file is given
    SPIN_CIRCUITS_LOG_LEVEL: Logging level name for the entry points (default INFO)
"""
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from .models.simulation import NoiseModel
from .utils.errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_VAR = "SPIN_CIRCUITS_THREADS"
NOISE_VAR = "SPIN_CIRCUITS_NOISE"
LOG_LEVEL_VAR = "SPIN_CIRCUITS_LOG_LEVEL"

LOG_FORMAT = "%(asctime)s - {component} - %(levelname)s - %(message)s"


@dataclass(frozen=True)
class Settings:
    threads: int = 1
    noise_path: Path | None = None
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> "Settings":
        """Read settings from the environment.

        Raises:
            ConfigError: If a variable is set to an unusable value
        """
        raw_threads = os.environ.get(THREADS_VAR, "1")
        try:
            threads = int(raw_threads)
        except ValueError as e:
            raise ConfigError(f"{THREADS_VAR} must be an integer, got {raw_threads!r}") from e
        if threads < 1:
            raise ConfigError(f"{THREADS_VAR} must be at least 1, got {threads}")

        noise = os.environ.get(NOISE_VAR)
        log_level = os.environ.get(LOG_LEVEL_VAR, "INFO").upper()
        if not isinstance(logging.getLevelName(log_level), int):
            raise ConfigError(f"{LOG_LEVEL_VAR} is not a logging level: {log_level!r}")
        return cls(threads=threads, noise_path=Path(noise) if noise else None, log_level=log_level)

    def load_noise(self, path: str | Path | None = None) -> NoiseModel:
        """Explicit path, then SPIN_CIRCUITS_NOISE, then the packaged default."""
        chosen = path or self.noise_path
        if chosen:
            logger.info(f"Loading noise model from {chosen}")
            return NoiseModel.from_file(chosen)
        logger.info("Using the packaged default noise model")
        return NoiseModel.default()


def configure_logging(component: str, level: str = "INFO", verbose: bool = False) -> None:
    """Configure root logging to stderr once per entry point."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, level, logging.INFO),
        format=LOG_FORMAT.format(component=component),
        force=True,
    )
