"""Experiment configuration: strict TOML loading and the hypothesis gate."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError, GateError
from ..models import PRESETS, from_preset

__all__ = [
    "EXPERIMENTS",
    "DEFAULT_LADDER",
    "DEFAULT_TOLERANCES",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "check_gate",
]

EXPERIMENTS = ("simulate", "kernel", "besov", "semigroup-scaling", "kolmogorov", "density")

DEFAULT_LADDER = tuple(2.0 ** -k for k in range(6, 0, -1))

# verdict thresholds; any of them can be overridden in [tolerances]
DEFAULT_TOLERANCES = {
    "cauchy_abs": 1e-6,
    "scaling_rel": 1e-8,
    "moment_slope": 0.05,
    "block_slope": 0.15,
    "partition_abs": 1e-12,
    "tr1_abs": 1e-12,
    "lj1_band": 2.0,
    "commutator_margin": 0.1,
    "duhamel_order": 1.8,
    "oracle_stderr": 3.0,
    "envelope_slope": 0.15,
    "fit_rms": 0.1,
    "kolmogorov_factor": 3.0,
    "trapezoid_ratio": 0.5,
    "kde_l1": 0.02,
    "kde_mass": 1e-3,
}

_SCHEMA = {
    "": {"experiment", "checks", "spec", "model", "grid", "mc", "time", "exponents",
         "tolerances", "threads"},
    "spec": {"alpha", "dim"},
    "model": {"preset", "params"},
    "grid": {"N", "L"},
    "mc": {"n_paths", "m", "seed"},
    "time": {"ladder", "T"},
    "exponents": {"gamma", "eta", "beta"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run depends on.

    ``beta`` is the drift Hölder exponent used by the gate and the envelopes;
    ``None`` takes the value declared by the model preset. ``N`` and ``L``
    left as ``None`` take the experiment's default grid.
    """

    experiment: str
    alpha: float = 1.0
    dim: int = 1
    preset: str = "identity"
    params: dict = field(default_factory=dict)
    N: int | None = None
    L: float | None = None
    n_paths: int = 10_000
    m: int = 256
    seed: int = 0
    t_ladder: tuple = DEFAULT_LADDER
    T: float = 1.0
    gamma: float = 0.5
    eta: float = 0.0
    beta: float | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: tuple | None = None
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"expected one of {', '.join(EXPERIMENTS)}")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if not 0 < self.alpha < 2:
            raise ConfigError("alpha must lie in (0, 2)")
        if self.dim < 1:
            raise ConfigError("dim must be positive")
        if self.N is not None and (self.N < 2 or self.N & (self.N - 1)):
            raise ConfigError("grid N must be a power of two")
        if self.L is not None and not self.L > 0:
            raise ConfigError("grid L must be positive")
        if self.n_paths < 0 or self.m < 1:
            raise ConfigError("mc.n_paths must be >= 0 and mc.m >= 1")
        if not self.t_ladder or any(not t > 0 for t in self.t_ladder):
            raise ConfigError("time ladder must be a non-empty list of positive times")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {', '.join(sorted(unknown))}")

    def grid(self, default_N: int, default_L: float) -> tuple:
        """(N, L), falling back to the experiment's own default grid."""
        return (int(self.N) if self.N is not None else default_N,
                float(self.L) if self.L is not None else default_L)

    def model(self):
        return from_preset(self.preset, self.dim, **self.params)

    def effective_beta(self) -> float:
        return float(self.beta) if self.beta is not None else float(self.model().beta)

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def echo(self) -> dict:
        """Plain-data copy of the configuration for reports."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            elif isinstance(v, dict):
                v = dict(sorted(v.items()))
            out[f.name] = v
        out["tolerances"] = dict(sorted({**DEFAULT_TOLERANCES, **self.tolerances}.items()))
        return out


def _check_keys(table: dict, section: str):
    allowed = _SCHEMA[section]
    unknown = sorted(set(table) - allowed)
    if unknown:
        where = f"[{section}]" if section else "top level"
        raise ConfigError(f"unknown key(s) at {where}: {', '.join(unknown)}")


def parse_config(data: dict) -> ExperimentConfig:
    """Build a config from a parsed TOML document; unknown keys are errors."""
    _check_keys(data, "")
    if "experiment" not in data:
        raise ConfigError("missing top-level key 'experiment'")
    kw = {"experiment": data["experiment"]}
    for section, mapping in (
        ("spec", {"alpha": "alpha", "dim": "dim"}),
        ("model", {"preset": "preset", "params": "params"}),
        ("grid", {"N": "N", "L": "L"}),
        ("mc", {"n_paths": "n_paths", "m": "m", "seed": "seed"}),
        ("time", {"ladder": "t_ladder", "T": "T"}),
        ("exponents", {"gamma": "gamma", "eta": "eta", "beta": "beta"}),
    ):
        table = data.get(section, {})
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
        _check_keys(table, section)
        for key, name in mapping.items():
            if key in table:
                kw[name] = table[key]
    if "t_ladder" in kw:
        kw["t_ladder"] = tuple(float(t) for t in kw["t_ladder"])
    if "tolerances" in data:
        kw["tolerances"] = {**DEFAULT_TOLERANCES, **data["tolerances"]}
    if "checks" in data:
        kw["checks"] = tuple(data["checks"])
    if "threads" in data:
        kw["threads"] = int(data["threads"])
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)


def check_gate(alpha: float, beta: float, gamma: float, eta: float) -> None:
    """Reject exponent choices outside the range where the regularity estimates hold."""
    if not alpha + beta > 1:
        raise GateError(f"hypothesis alpha + beta > 1 violated: alpha={alpha}, beta={beta}")
    top = alpha + min(alpha, beta)
    if not gamma < top:
        raise GateError(f"hypothesis gamma < alpha + min(alpha, beta) = {top:g} violated: "
                        f"gamma={gamma}")
    low = -min(alpha + beta - 1.0, 1.0)
    if not eta > low:
        raise GateError(f"hypothesis eta > -min(alpha + beta - 1, 1) = {low:g} violated: "
                        f"eta={eta}")
    if not (math.isfinite(gamma) and math.isfinite(eta)):
        raise GateError("exponents must be finite")
