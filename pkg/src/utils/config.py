"""Configuration management for lcirt."""
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

from .settings import settings

load_dotenv()

PROJECT_ROOT = Path(__file__).parent.parent.parent
CONFIG_PATH = PROJECT_ROOT / "config.yaml"


class Config:
    """Configuration singleton holding the numeric defaults of config.yaml."""

    _instance = None
    _config: dict = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._load_config(Path(settings.config or CONFIG_PATH))
        return cls._instance

    def _load_config(self, path: Path) -> None:
        """Load configuration from a YAML file."""
        if path.exists():
            with open(path, "r") as f:
                self._config = yaml.safe_load(f) or {}
        else:
            self._config = {}

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value using dot notation."""
        keys = key.split(".")
        value = self._config
        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default
            if value is None:
                return default
        return value

    @property
    def tol(self) -> float:
        return float(self.get("estimation.tol", 1e-9))

    @property
    def max_iter(self) -> int:
        return int(self.get("estimation.max_iter", 5000))

    @property
    def fisher_sweeps(self) -> int:
        return int(self.get("estimation.fisher_sweeps", 1))

    @property
    def max_halvings(self) -> int:
        return int(self.get("estimation.max_halvings", 10))

    @property
    def ridge(self) -> float:
        return float(self.get("estimation.ridge", 1e-8))

    @property
    def degenerate_weight(self) -> float:
        return float(self.get("estimation.degenerate_weight", 1e-8))

    @property
    def logit_clamp(self) -> float:
        return float(self.get("estimation.logit_clamp", 35.0))

    @property
    def n_random(self) -> int:
        return int(self.get("estimation.n_random", 0))

    @property
    def seed(self) -> int:
        return int(self.get("estimation.seed", 0))

    @property
    def missing_code(self) -> int:
        return int(self.get("data.missing_code", 999))

    @property
    def alpha(self) -> float:
        return float(self.get("selection.alpha", 0.05))

    @property
    def cluster_random_starts(self) -> int:
        return int(self.get("selection.cluster_random_starts", 1))

    @property
    def block_size(self) -> int:
        return int(self.get("simulation.block_size", 10000))


config = Config()
