"""Flat ``key = value`` run configuration."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .profiles import FAMILIES
from .solver import GasParams


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    N: int = 3
    R: float = 1.0
    J: int = 128
    a: float = 1.0
    gamma: float = 1.4
    mu: float = 1.0
    lam: float = 0.0
    profile: str = "polynomial-bump"
    amplitude: float = 1e-3
    rho_ref: float = 1.0
    t_end: float = 0.5
    output_interval: float = 0.05
    cfl: float = 0.4
    splitting: str = "lie"
    seed: int = 0
    delta: float = 1e-3
    eps: float = 0.1
    repr_tol: float = 1e-3
    volume_tol: float = 1e-8
    energy_tol: float = 1e-8

    def __post_init__(self):
        checks = [
            ("N", self.N in (2, 3), "N must be 2 or 3"),
            ("R", self.R > 0, "R must be > 0"),
            ("J", self.J >= 32, "J must be >= 32"),
            ("a", self.a >= 0, "a must be >= 0"),
            ("gamma", self.gamma > 1, "gamma must be > 1"),
            ("mu", self.mu > 0, "mu must be > 0"),
            ("lambda", self.mu + 0.5 * self.N * self.lam >= 0,
             f"mu + (N/2) lambda must be >= 0 (got {self.mu + 0.5 * self.N * self.lam:g})"),
            ("profile", self.profile in FAMILIES, f"profile must be one of {', '.join(FAMILIES)}"),
            ("t_end", self.t_end > 0, "t_end must be > 0"),
            ("output_interval", self.output_interval > 0, "output_interval must be > 0"),
            ("cfl", 0 < self.cfl <= 1, "cfl must lie in (0, 1]"),
            ("splitting", self.splitting in ("lie", "strang"), "splitting must be lie or strang"),
            ("seed", self.seed >= 0, "seed must be >= 0"),
            ("delta", self.delta >= 0, "delta must be >= 0"),
            ("eps", self.eps > 0, "eps must be > 0"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(f"{key}: {msg}", key=key)

    @property
    def gas(self) -> GasParams:
        return GasParams(self.a, self.gamma, self.mu, self.lam)


# config-file key -> field name
_ALIASES = {"lambda": "lam"}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(kind: str, raw: str):
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Unknown or repeated keys are errors; missing keys take the defaults.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key or not raw:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        name = _ALIASES.get(key, key)
        if name not in _TYPES:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if name in values:
            raise ConfigError(f"duplicate key {key!r}", line=lineno, key=key)
        try:
            values[name] = _convert(_TYPES[name], raw)
        except ValueError:
            raise ConfigError(f"{key}: cannot read {raw!r} as {_TYPES[name]}", line=lineno, key=key) from None
    return RunConfig(**values)


def format_config(cfg: RunConfig) -> str:
    inverse = {v: k for k, v in _ALIASES.items()}
    return "".join(f"{inverse.get(f.name, f.name)} = {getattr(cfg, f.name)}\n" for f in fields(cfg))
