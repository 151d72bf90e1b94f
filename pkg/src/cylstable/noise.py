"""Increments of the d-dimensional cylindrical alpha-stable process.

Each coordinate is an independent symmetric alpha-stable Levy process with
Levy measure dz / |z|^(1+alpha), so over a time step dt its characteristic
function is exp(-c_alpha * dt * |xi|^alpha) with
c_alpha = 2 * int_0^inf (1 - cos u) u^(-1-alpha) du.

Random numbers come from a counter-based hash keyed by
(seed, path, step, coordinate), so any sample can be regenerated
independently of how the work was split across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._quad import levy_constant_series
from .errors import DomainError

__all__ = [
    "StableSpec",
    "NoiseMatrix",
    "levy_constant",
    "sample_standard_stable",
    "sample_increments",
]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 2.0) or not math.isfinite(alpha):
        raise DomainError(f"stability index must lie in (0, 2), got {alpha!r}")
    return alpha


def levy_constant(alpha: float, panel_width: float = math.pi / 8) -> float:
    """Levy-exponent constant c_alpha = 2 int_0^inf (1 - cos u) u^(-1-alpha) du.

    Computed by quadrature (series on [0, 1], Gauss-Legendre panels of width
    ``panel_width`` up to u = 400, asymptotic expansion beyond). c_1 = pi.
    """
    alpha = _check_alpha(alpha)
    return levy_constant_series(alpha, float(panel_width))


@dataclass(frozen=True)
class StableSpec:
    """Stability index and dimension of the driving cylindrical process."""

    alpha: float
    dim: int = 1
    c_alpha: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha = _check_alpha(self.alpha)
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "c_alpha", levy_constant(alpha))

    def increment_scale(self, dt: float) -> float:
        """Multiplier turning a standard stable draw into a dt-increment."""
        if not dt > 0:
            raise DomainError(f"time step must be positive, got {dt!r}")
        return (self.c_alpha * dt) ** (1.0 / self.alpha)


@dataclass(frozen=True)
class NoiseMatrix:
    values: np.ndarray  # (n_paths, d)
    dt: float
    seed: int

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]


def _seed(seed) -> int:
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise DomainError("seed must be an unsigned 64-bit integer")
    return seed


def sample_standard_stable(alpha: float, n: int, seed: int, *, step: int = 0,
                           threads: int = 1, backend=None) -> np.ndarray:
    """n i.i.d. symmetric stable draws with characteristic function exp(-|xi|^alpha).

    Sample ``k`` is the hash-counter draw for path ``k``, coordinate 0, at
    the given step, so outputs are prefix-stable in ``n``.
    """
    alpha = _check_alpha(alpha)
    if n < 1:
        raise DomainError("n must be at least 1")
    out = np.empty((int(n), 1))
    _backend.stable_fill(out, _seed(seed), 0, int(step), alpha, 1.0, threads, backend)
    return out[:, 0]


def sample_increments(spec: StableSpec, dt: float, n_paths: int, seed: int, *,
                      step: int = 0, path0: int = 0, threads: int = 1,
                      backend=None) -> NoiseMatrix:
    """Increments of Z over a step of length dt, one row per path."""
    scale = spec.increment_scale(dt)
    if n_paths < 0:
        raise DomainError("n_paths must be non-negative")
    out = np.empty((int(n_paths), spec.dim))
    if n_paths:
        _backend.stable_fill(out, _seed(seed), int(path0), int(step), spec.alpha,
                             scale, threads, backend)
    return NoiseMatrix(out, float(dt), _seed(seed))
