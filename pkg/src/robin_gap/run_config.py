import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from robin_gap.errors import ConfigError
from robin_gap.parallel import thread_count
from robin_gap.report import write_text

MIN_N_MAX = 16
MIN_M_TRUNC = 8
MIN_Q_TRUNC = 32
MIN_GRID_POINTS = 4

DEFAULT_TOLERANCES = {
    "zero_residual": 1e-12,
    "dtn_route_agreement": 1e-13,
    "growth_slope": 0.05,
    "c0_rel": 1e-9,
    "c1_rel": 1e-6,
    "c2_rel": 1e-3,
    "rate_exponent": 0.02,
    "rate_constant": 0.01,
    "drift_slope": 0.1,
    "identity_rel": 1e-10,
}


def default_beta_grid() -> List[float]:
    return [float(beta) for beta in np.logspace(2.0, 6.0, 9)]


@dataclass
class RunConfig:
    n_max: int = 2000
    m_trunc: int = 64
    q_trunc: int = 64
    beta_grid: List[float] = field(default_factory=default_beta_grid)
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: str = "out"
    threads: int = field(default_factory=thread_count)

    @staticmethod
    def from_file(path: str) -> "RunConfig":
        """
        Load a RunConfig from a flat JSON file. A missing file yields the defaults.

        Raises:
            ConfigError: If the file is not a JSON object or holds invalid values
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError:
            logging.warning(f"Config file {path} not found, using defaults.")
            return RunConfig()
        except json.JSONDecodeError as e:
            raise ConfigError(f"Malformed config file {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        return RunConfig.from_dict(data)

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        """Create a RunConfig from a dictionary; unknown keys are ignored."""
        args = {key: value for key, value in data.items() if key in RunConfig.__dataclass_fields__}
        tolerances = dict(DEFAULT_TOLERANCES)
        tolerances.update(args.pop("tolerances", None) or {})
        try:
            config = RunConfig(**args, tolerances=tolerances)
            config.n_max = int(config.n_max)
            config.m_trunc = int(config.m_trunc)
            config.q_trunc = int(config.q_trunc)
            config.threads = int(config.threads)
            config.beta_grid = [float(beta) for beta in config.beta_grid]
            config.tolerances = {name: float(value) for name, value in config.tolerances.items()}
            config.output_dir = str(config.output_dir)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid config value: {e}") from e
        config.validate()
        return config

    def merged(self, overrides: dict) -> "RunConfig":
        """Copy with the non-None entries of overrides applied, as CLI flags override a file."""
        data = self.to_dict()
        data.update({key: value for key, value in overrides.items() if value is not None})
        return RunConfig.from_dict(data)

    def validate(self):
        if self.n_max < MIN_N_MAX:
            raise ConfigError(f"n_max must be at least {MIN_N_MAX}, got {self.n_max}")
        if self.m_trunc < MIN_M_TRUNC:
            raise ConfigError(f"m_trunc must be at least {MIN_M_TRUNC}, got {self.m_trunc}")
        if self.q_trunc < MIN_Q_TRUNC:
            raise ConfigError(f"q_trunc must be at least {MIN_Q_TRUNC}, got {self.q_trunc}")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if len(self.beta_grid) < MIN_GRID_POINTS:
            raise ConfigError(f"beta_grid needs at least {MIN_GRID_POINTS} points, got {len(self.beta_grid)}")
        if self.beta_grid[0] <= 0 or any(b <= a for a, b in zip(self.beta_grid, self.beta_grid[1:])):
            raise ConfigError("beta_grid must be positive and strictly increasing")
        bad = [name for name, value in self.tolerances.items() if not value > 0]
        if bad:
            raise ConfigError(f"Tolerances must be positive: {', '.join(sorted(bad))}")

    def tolerance(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])

    def to_file(self, path: str):
        """Save the RunConfig to a JSON file."""
        write_text(path, self.to_json())

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "m_trunc": self.m_trunc,
            "q_trunc": self.q_trunc,
            "beta_grid": list(self.beta_grid),
            "tolerances": dict(self.tolerances),
            "output_dir": self.output_dir,
            "threads": self.threads,
        }
