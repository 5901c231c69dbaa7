"""Experiment configuration: flat ``key = value`` files plus ``--key=value``
overrides. Angles are given in degrees and stored in radians."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from relaysec.channel import COMBINING_MODES, SystemParams
from relaysec.info import DEFAULT_PRECISION, resolve_engine


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    order: int = 4
    snr_db: tuple[float, ...] = (10.0,)
    theta_start: float = 0.0
    theta_stop: float = np.pi / 2
    theta_step: float = np.radians(5.0)
    alpha: float | None = 1.0
    relay_power_db: float | None = None
    engine: str = "quadrature"
    trials: int = 100_000
    nodes: int = 24
    oracle_points: int = DEFAULT_PRECISION["grid-oracle"]
    seed: int = 0
    out: str | None = None
    combining: str = "weighted"
    detector: str = "marginal"
    workers: int = 1

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ConfigError("order", f"must be an integer >= 2, got {self.order}")
        if len(self.snr_db) == 0:
            raise ConfigError("snr_db", "at least one SNR point is required")
        if not self.theta_step > 0:
            raise ConfigError("theta", f"step must be positive, got {np.degrees(self.theta_step)} deg")
        if self.theta_stop < self.theta_start - 1e-12:
            raise ConfigError("theta", "grid is empty (stop < start)")
        if (self.alpha is None) == (self.relay_power_db is None):
            raise ConfigError("alpha", "set exactly one of alpha and relay_power")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError("alpha", f"must be positive, got {self.alpha}")
        try:
            object.__setattr__(self, "engine", resolve_engine(self.engine))
        except ValueError as exc:
            raise ConfigError("engine", str(exc)) from None
        if self.trials < 1000:
            raise ConfigError("trials", f"must be >= 1000, got {self.trials}")
        if self.nodes < 1:
            raise ConfigError("nodes", f"must be >= 1, got {self.nodes}")
        if self.oracle_points < 1:
            raise ConfigError("oracle_points", f"must be >= 1, got {self.oracle_points}")
        if self.combining not in COMBINING_MODES:
            raise ConfigError("combining", f"must be one of {COMBINING_MODES}")
        if self.detector not in ("marginal", "joint"):
            raise ConfigError("detector", "must be 'marginal' or 'joint'")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")

    @property
    def thetas(self) -> np.ndarray:
        n = int(np.floor((self.theta_stop - self.theta_start) / self.theta_step + 1e-9)) + 1
        return self.theta_start + self.theta_step * np.arange(n)

    @property
    def precision(self) -> int:
        return {"monte-carlo": self.trials, "quadrature": self.nodes,
                "grid-oracle": self.oracle_points}[self.engine]

    def params(self, snr_db: float, theta: float) -> SystemParams:
        p = 10.0 ** (snr_db / 10.0)
        if self.alpha is not None:
            relay = dict(alpha_override=self.alpha)
        else:
            relay = dict(relay_power=10.0 ** (self.relay_power_db / 10.0))
        return SystemParams(p1=p, p2=p, theta=float(theta), order=self.order,
                            combining=self.combining, **relay)

    def with_overrides(self, overrides: dict[str, str]) -> "ExperimentConfig":
        return replace(self, **_convert(overrides))


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}
_ALIASES = {"snr": "snr_db", "power_db": "snr_db", "relay_power": "relay_power_db", "m": "order"}
_DEGREE_KEYS = {"theta_start", "theta_stop", "theta_step"}


def normalise_key(key: str) -> str:
    key = key.strip().lstrip("-").replace("-", "_").lower()
    return _ALIASES.get(key, key)


def _convert(raw: dict[str, str]) -> dict:
    out = {}
    for key, text in raw.items():
        name = normalise_key(key)
        if name not in _FIELD_NAMES:
            raise ConfigError(name, "unknown configuration key")
        text = str(text).strip()
        try:
            if name == "snr_db":
                out[name] = tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
            elif name in _DEGREE_KEYS:
                out[name] = float(np.radians(float(text)))
            elif name in ("order", "trials", "nodes", "oracle_points", "seed", "workers"):
                out[name] = int(text)
            elif name in ("alpha", "relay_power_db"):
                out[name] = None if text.lower() in ("", "none") else float(text)
            elif name == "out":
                out[name] = text or None
            else:
                out[name] = text
        except ValueError:
            raise ConfigError(name, f"cannot parse {text!r}") from None
    # choosing one relay setting switches the other off
    if out.get("relay_power_db") is not None and "alpha" not in out:
        out["alpha"] = None
    if out.get("alpha") is not None and "relay_power_db" not in out:
        out["relay_power_db"] = None
    return out


def parse_config_text(text: str) -> dict[str, str]:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        entries[normalise_key(key)] = value.strip()
    return entries


def load_config(path: str | Path | None = None, overrides: dict[str, str] | None = None,
                base: ExperimentConfig | None = None) -> ExperimentConfig:
    raw: dict[str, str] = {}
    if path is not None:
        raw.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    cli = {normalise_key(k): v for k, v in (overrides or {}).items()}
    # a relay setting on the command line replaces the file's one
    if "alpha" in cli:
        raw.pop("relay_power_db", None)
    if "relay_power_db" in cli:
        raw.pop("alpha", None)
    raw.update(cli)
    try:
        return (base or ExperimentConfig()).with_overrides(raw)
    except ConfigError:
        raise
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None
