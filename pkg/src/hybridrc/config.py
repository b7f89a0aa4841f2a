"""Experiment configuration: defaults, JSON parsing and validation.

A config file is a flat JSON object whose keys match the ExperimentConfig
fields below; unknown keys are rejected. The ensemble size accepts the
string "inf" (skip measurement sampling) and tau_prime accepts "auto"
(ceil(tau / 2)). Gains left at null default per task family: rho=0.7,
iota=10^(-4/3) for the linear tasks (memory, trace, offdiag) and rho=0.1,
iota=0.01 for the nonlinear ones (determinant, entanglement).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .tasks import TASKS

__all__ = ["ExperimentConfig", "load_config", "config_from_dict"]

LINEAR_TASKS = {"memory", "trace", "offdiag"}
BASELINES = ("hybrid", "qrc-only", "esn-only", "qrc-single")

LINEAR_GAINS = {"rho": 0.7, "iota": 10 ** (-4 / 3)}
NONLINEAR_GAINS = {"rho": 0.1, "iota": 0.01}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment cell; defaults follow the benchmark setup."""

    task: str = "memory"
    tau: int = 2
    tau_prime: int | str = "auto"   # "auto" = ceil(tau / 2)
    N: int = 9
    R: float = 0.4
    p: float = 7 / 9
    M: float = 1e5                  # ensemble size, math.inf allowed
    N_esn: int = 45
    rho: float | None = None        # None = per-task default
    iota: float | None = None
    washout: int = 500
    train_len: int = 3000
    test_len: int = 1000
    ridge: float = 0.0
    realizations: int = 100
    master_seed: int = 0
    baseline: str = "hybrid"
    esn_scaling: str = "spectral_radius"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; choose from "
                              f"{sorted(TASKS)}")
        if self.baseline not in BASELINES:
            raise ConfigError(f"unknown baseline {self.baseline!r}; choose "
                              f"from {BASELINES}")
        if self.tau < 0:
            raise ConfigError("tau must be >= 0")
        if self.tau_prime != "auto":
            if not isinstance(self.tau_prime, int) or self.tau_prime < 0:
                raise ConfigError("tau_prime must be 'auto' or an integer >= 0")
            if self.tau_prime > self.tau:
                raise ConfigError(f"tau_prime {self.tau_prime} exceeds tau {self.tau}")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if TASKS[self.task].input_kind == "two" and self.N < 2:
            raise ConfigError(f"task {self.task!r} uses two-mode inputs and is "
                              "not defined for N = 1")
        if not 0.0 <= self.R <= 1.0:
            raise ConfigError("R must be in [0, 1]")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError("p must be in [0, 1]")
        if self.M != math.inf:
            if self.M != int(self.M) or self.M < 1:
                raise ConfigError("M must be a positive integer or 'inf'")
            if self.M < self.N:
                raise ConfigError(f"M = {int(self.M)} is below N = {self.N}; "
                                  "the measurement estimate would be singular")
        if self.N_esn < 1:
            raise ConfigError("N_esn must be >= 1")
        if min(self.washout, self.train_len, self.test_len) <= 0:
            raise ConfigError("phase lengths must be positive")
        if self.tau >= self.washout:
            raise ConfigError(f"tau {self.tau} must be below the wash-out "
                              f"length {self.washout}")
        if self.ridge < 0:
            raise ConfigError("ridge must be >= 0")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if self.esn_scaling not in ("spectral_radius", "operator_norm"):
            raise ConfigError("esn_scaling must be 'spectral_radius' or "
                              "'operator_norm'")

    @property
    def tau_prime_resolved(self) -> int:
        if self.tau_prime == "auto":
            return math.ceil(self.tau / 2)
        return self.tau_prime

    @property
    def rho_resolved(self) -> float:
        if self.rho is not None:
            return self.rho
        gains = LINEAR_GAINS if self.task in LINEAR_TASKS else NONLINEAR_GAINS
        return gains["rho"]

    @property
    def iota_resolved(self) -> float:
        if self.iota is not None:
            return self.iota
        gains = LINEAR_GAINS if self.task in LINEAR_TASKS else NONLINEAR_GAINS
        return gains["iota"]

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **_convert(kwargs))

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "M" and value == math.inf:
                value = "inf"
            out[f.name] = value
        return out


def _convert(raw: dict) -> dict:
    """Normalize JSON-ish values to field types."""
    out = dict(raw)
    if "M" in out:
        m = out["M"]
        if isinstance(m, str):
            if m.lower() not in ("inf", "infinity"):
                raise ConfigError(f"M must be a positive integer or 'inf', got {m!r}")
            out["M"] = math.inf
        else:
            out["M"] = float(m)
    for key in ("tau", "N", "N_esn", "washout", "train_len", "test_len",
                "realizations", "master_seed"):
        if key in out:
            value = out[key]
            if value != int(value):
                raise ConfigError(f"{key} must be an integer, got {value!r}")
            out[key] = int(value)
    if "tau_prime" in out and out["tau_prime"] != "auto":
        value = out["tau_prime"]
        if not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"tau_prime must be 'auto' or an integer, got {value!r}")
        out["tau_prime"] = int(value)
    return out


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from a flat dict, rejecting unknown keys."""
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}; "
                          f"known keys: {sorted(known)}")
    return ExperimentConfig(**_convert(raw))


def load_config(path) -> ExperimentConfig:
    """Parse a flat JSON config file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a flat JSON object")
    return config_from_dict(raw)
