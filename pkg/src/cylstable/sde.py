"""Euler simulation of dX = sigma(t, X-) dZ + b(t, X) dt.

Every path carries its own noise stream keyed by its index, and all starting
points of one path share it (common random numbers). Paths are advanced in
chunks so memory stays bounded; the chunking never changes the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DomainError
from .models import CoefficientModel
from .noise import StableSpec, _seed

__all__ = ["PathBatch", "simulate", "DEFAULT_STEPS"]

DEFAULT_STEPS = 256
_MAX_COMPILED_DIM = 16


@dataclass
class PathBatch:
    """Terminal values X_{s,t}(x) for every path and starting point.

    ``values`` has shape ``(n_paths, k, d)``. Entries flagged in ``censored``
    hit a non-finite state; they hold the last finite state and must be
    skipped by estimators (``finite_mask``).
    """

    s: float
    t: float
    m: int
    x0: np.ndarray
    values: np.ndarray
    seed: int
    censored: np.ndarray
    backend: str = "python"
    meta: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def n_censored(self) -> int:
        return int(np.count_nonzero(self.censored))

    @property
    def censoring_rate(self) -> float:
        return self.n_censored / max(self.censored.size, 1)

    @property
    def finite_mask(self) -> np.ndarray:
        return ~self.censored.astype(bool)


def _prepare_x0(x0, n_paths, d):
    x = np.asarray(x0, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, d) if d > 1 or x.size == 1 else x[:, None]
    if x.ndim == 2:
        if x.shape[1] != d:
            raise DomainError(f"starting points must have {d} coordinates")
        return x, False
    if x.ndim == 3 and x.shape[0] == n_paths and x.shape[2] == d:
        return x, True
    raise DomainError("x0 must have shape (k, d) or (n_paths, k, d)")


def _use_compiled(model, backend, d):
    if backend == "python":
        return False
    ok = model.kernel is not None and _backend.compiled() is not None and d <= _MAX_COMPILED_DIM
    if backend == "compiled" and not ok:
        raise DomainError("compiled backend needs a preset model, dim <= 16 and a built extension")
    return ok


def simulate(model: CoefficientModel, spec: StableSpec, s: float, t: float, x0,
             m: int = DEFAULT_STEPS, n_paths: int = 1, seed: int = 0, *,
             threads: int = 1, backend: str | None = None, path0: int = 0,
             step0: int = 0, chunk: int = 1 << 15) -> PathBatch:
    """Run ``n_paths`` Euler paths with ``m`` uniform steps from ``s`` to ``t``.

    Parameters
    ----------
    x0 : array, shape (k, d) or (n_paths, k, d)
        Starting points, shared by all paths or given per path.
    threads : int
        Parallel width; the result does not depend on it.
    backend : {None, "compiled", "python"}
        ``None`` uses compiled kernels when the model is a preset.
    path0, step0 : int
        Offsets into the noise counter, to continue or split a run.
    """
    if model.dim != spec.dim:
        raise DomainError("model and noise dimensions differ")
    if not t > s:
        raise DomainError("need s < t")
    if int(m) != m or m < 1:
        raise DomainError("step count must be a positive integer")
    if n_paths < 0:
        raise DomainError("n_paths must be non-negative")
    seed = _seed(seed)
    m = int(m)
    d = spec.dim
    x, per_path = _prepare_x0(x0, n_paths, d)
    K = x.shape[-2]
    dt = (t - s) / m
    scale = spec.increment_scale(dt)
    values = np.empty((n_paths, K, d))
    censored = np.zeros((n_paths, K), dtype=np.uint8)
    compiled = _use_compiled(model, backend, d)
    for a in range(0, n_paths, chunk):
        b = min(a + chunk, n_paths)
        X = np.array(x[a:b] if per_path else np.broadcast_to(x, (b - a, K, d)), order="C")
        cens = np.zeros((b - a, K), dtype=np.uint8)
        if compiled:
            kd = model.kernel
            _backend.compiled().euler_chunk(
                X, cens, seed, path0 + a, step0, m, float(s), dt, spec.alpha, scale,
                kd.sigma_kind, np.ascontiguousarray(kd.sigma_params, dtype=float),
                kd.drift_kind, np.ascontiguousarray(kd.drift_params, dtype=float),
                int(threads))
        else:
            _backend.python().euler_chunk(
                X, cens, seed, path0 + a, step0, m, float(s), dt, spec.alpha, scale,
                model.sigma, model.b, nthreads=int(threads))
        values[a:b] = X
        censored[a:b] = cens
    return PathBatch(float(s), float(t), m, x, values, seed, censored,
                     backend="compiled" if compiled else "python",
                     meta={"dt": dt, "path0": path0, "step0": step0})
