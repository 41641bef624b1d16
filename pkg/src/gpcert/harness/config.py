"""Run configuration: JSON file plus command-line overrides (flags win)."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

CONFIG_ENV = "GPCERT_CONFIG"

ACCEPTANCE_CHECKS = [
    "enumeration",
    "golden",
    "terms",
    "moves",
    "resum",
    "factorize",
    "trace",
    "definetti",
    "mild",
    "ledger",
    "nls-order",
]
EXTRA_CHECKS = ["nls-dn", "strichartz", "term-bound-shifted", "mild-sign", "moves-frozen"]
KNOWN_CHECKS = ACCEPTANCE_CHECKS + EXTRA_CHECKS


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    checks: List[str] = field(default_factory=lambda: list(ACCEPTANCE_CHECKS))
    k_max: int = 3
    r_max: int = 5
    n: int = 64
    d: int = 1
    t: float = 0.5
    seed: int = 1234
    q: int = 8
    lam: int = 1
    T: Optional[float] = None  # defaults to 0.9 / (2 C M^4)
    M: float = 1.0
    C: float = 1.0
    tol_quadrature: float = 1e-6
    tol_exact: float = 1e-10
    random_trees: int = 100
    trace_samples: int = 50
    json_out: Optional[str] = None
    csv_out: Optional[str] = None
    figures: Optional[str] = None

    def __post_init__(self):
        self.validate()

    @property
    def horizon_T(self) -> float:
        return self.T if self.T is not None else 0.9 / (2 * self.C * self.M**4)

    def validate(self):
        unknown = [c for c in self.checks if c not in KNOWN_CHECKS]
        if unknown:
            raise ConfigError(f"unknown check(s): {', '.join(unknown)}")
        if not 1 <= self.k_max <= 3 or not 1 <= self.r_max <= 6:
            raise ConfigError("enumeration range must satisfy k <= 3 and r <= 6")
        if self.d not in (1, 2, 3):
            raise ConfigError("d must be 1, 2 or 3")
        if self.n < 8 or self.n & (self.n - 1):
            raise ConfigError("n must be a power of two >= 8")
        if self.tol_quadrature <= 0 or self.tol_exact <= 0:
            raise ConfigError("tolerances must be positive")
        if self.q < 1:
            raise ConfigError("quadrature order must be positive")
        if self.lam not in (1, -1):
            raise ConfigError("lam must be +1 or -1")
        if self.t < 0:
            raise ConfigError("t must be nonnegative")
        if self.M <= 0 or self.C <= 0 or (self.T is not None and self.T < 0):
            raise ConfigError("M, C must be positive and T nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Read a JSON config (``path`` or the env default) and apply overrides."""
    data = {}
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    names = {f.name for f in fields(RunConfig)}
    bad = [k for k in data if k not in names]
    if bad:
        raise ConfigError(f"unknown config key(s): {', '.join(bad)}")
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
