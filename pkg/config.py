"""
Configuration Module

This module handles loading, validating and saving the settings of a single
command-line run.
"""

import os
import json
import logging
from dataclasses import dataclass, field, asdict, fields
from typing import Any, Dict, Optional

from errors import ConfigError

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

COMMANDS = {
    "cm": ("simulate", "conserved", "lax-check", "moment-map"),
    "nek": ("z", "prepotential", "plancherel", "defect"),
    "qq": ("check", "eval"),
    "spec": ("lax", "curve"),
    "pfun": ("theta", "wp"),
}
THEORIES = ("4d", "5d", "6d")
MODES = ("float64", "extended", "exact")
FORMATS = ("json", "csv")
DEFAULT_SEED = 20240521


@dataclass
class RunConfig:
    """Settings of a single run."""

    # Dispatch
    command: str = "nek"
    action: str = "z"

    # Theory settings
    theory: str = "4d"
    N: int = 2
    r: int = 1
    order: int = 2
    inner_order: Optional[int] = None
    params_file: Optional[str] = None
    mode: str = "float64"
    dps: int = 30

    # Output settings
    output: Optional[str] = None
    fmt: str = "json"
    seed: int = DEFAULT_SEED
    threads: int = 1
    check: bool = False
    dry_run: bool = False
    log_level: str = "INFO"
    progress: bool = False
    log_dir: Optional[str] = None

    # Calogero-Moser settings
    kind: str = "rational"
    t_end: float = 1.0
    dt: float = 1e-3
    integrator: str = "rk4"
    nu: float = 1.0
    tau: Any = field(default_factory=lambda: [0.0, 1.0])

    # Spectral settings
    data_file: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def tau_complex(self) -> complex:
        if isinstance(self.tau, (list, tuple)):
            return complex(float(self.tau[0]), float(self.tau[1]))
        return complex(self.tau)

    def effective_threads(self) -> int:
        """Thread count, NEK_THREADS taking precedence over the configured value."""
        value = os.environ.get("NEK_THREADS")
        if value:
            try:
                threads = int(value)
            except ValueError:
                raise ConfigError(f"NEK_THREADS must be an integer, got {value!r}")
            if threads < 1:
                raise ConfigError(f"NEK_THREADS must be positive, got {threads}")
            return threads
        return self.threads

    def validate(self) -> "RunConfig":
        """
        Check the invariants of the configuration.

        Returns:
            RunConfig: self, for chaining

        Raises:
            ConfigError: on any violation
        """
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command: {self.command}")
        if self.action not in COMMANDS[self.command]:
            raise ConfigError(f"Unknown action for {self.command}: {self.action}")
        if self.theory not in THEORIES:
            raise ConfigError(f"Unknown theory: {self.theory}")
        if self.mode not in MODES:
            raise ConfigError(f"Unknown numeric mode: {self.mode}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"Unknown output format: {self.fmt}")
        if self.mode == "exact" and self.theory != "4d":
            raise ConfigError("Exact arithmetic is only available for the 4d theory")
        if self.N < 1:
            raise ConfigError(f"N must be at least 1, got {self.N}")
        if self.r < 1:
            raise ConfigError(f"r must be at least 1, got {self.r}")
        if self.order < 0 or (self.inner_order is not None and self.inner_order < 0):
            raise ConfigError("Orders must be non-negative")
        if self.dt <= 0:
            raise ConfigError(f"Time step must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ConfigError(f"End time must be non-negative, got {self.t_end}")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if self.dps < 15:
            raise ConfigError(f"Extended precision needs at least 15 digits, got {self.dps}")
        if self.kind not in ("rational", "trig", "elliptic"):
            raise ConfigError(f"Unknown Calogero-Moser kind: {self.kind}")
        if self.integrator not in ("rk4", "leapfrog", "dop853"):
            raise ConfigError(f"Unknown integrator: {self.integrator}")
        if self.tau_complex.imag <= 0:
            raise ConfigError(f"Modular parameter needs Im tau > 0, got {self.tau}")
        return self

    def save(self, filepath="run_config.json"):
        """
        Save configuration to a JSON file.

        Args:
            filepath (str): Path to save the configuration
        """
        try:
            with open(filepath, "w") as f:
                json.dump(asdict(self), f, indent=2, sort_keys=True)
            logger.info(f"Configuration saved to {filepath}")
        except OSError as e:
            logger.error(f"Error saving configuration: {str(e)}")
            raise ConfigError(f"Cannot write configuration to {filepath}: {str(e)}")

    @classmethod
    def load(cls, filepath="run_config.json") -> "RunConfig":
        """
        Load configuration from a JSON file.

        A missing file gives the defaults; a malformed one raises ConfigError.

        Args:
            filepath (str): Path to load the configuration from

        Returns:
            RunConfig: Loaded configuration
        """
        if not os.path.exists(filepath):
            logger.warning(f"Configuration file {filepath} not found, using defaults")
            return cls()

        try:
            with open(filepath, "r") as f:
                config_dict = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading configuration: {str(e)}")
            raise ConfigError(f"Malformed configuration file {filepath}: {str(e)}")
        if not isinstance(config_dict, dict):
            raise ConfigError(f"Configuration file {filepath} must hold a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(config_dict) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration fields: {', '.join(unknown)}")
        logger.info(f"Configuration loaded from {filepath}")
        return cls(**config_dict)

    def merged(self, overrides: Dict[str, Any]) -> "RunConfig":
        """Copy with every non-None override applied."""
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None and k in data})
        return RunConfig(**data)
