"""Coefficient models sigma(t, x), b(t, x) and checks of the standing assumptions.

Callables are vectorised: ``sigma(t, x)`` takes ``x`` of shape ``(..., d)``
and returns ``(..., d, d)``; ``b(t, x)`` returns ``(..., d)``.

Built-in presets additionally carry a ``kernel`` descriptor so the compiled
Euler stepper can evaluate them without calling back into Python.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AssumptionError, DomainError

__all__ = [
    "CoefficientModel",
    "AssumptionReport",
    "KernelDescriptor",
    "identity",
    "constant",
    "diag_sine",
    "rotation_mix",
    "holder_drift",
    "tabulated",
    "from_preset",
    "PRESETS",
    "validate_assumptions",
    "default_probe_grid",
]

# codes understood by _kernels.euler_chunk
SIGMA_KINDS = {"const": 0, "diag_sine": 1, "rotation_mix": 2}
DRIFT_KINDS = {"zero": 0, "const": 1, "holder": 2}


@dataclass(frozen=True)
class KernelDescriptor:
    sigma_kind: int
    sigma_params: np.ndarray
    drift_kind: int
    drift_params: np.ndarray


@dataclass(frozen=True)
class CoefficientModel:
    """Diffusion matrix and drift with their declared constants.

    ``c0``: ellipticity, singular values of sigma in [1/c0, c0].
    ``c1``: Lipschitz constant of sigma in x.
    ``beta``, ``c3``: Hölder exponent/constant of b, and |b| <= c3.
    """

    sigma: Callable
    b: Callable
    dim: int
    c0: float = 1.0
    c1: float = 0.0
    beta: float = 1.0
    c3: float = 0.0
    name: str = "custom"
    params: dict = field(default_factory=dict)
    kernel: KernelDescriptor | None = None
    constant_sigma: np.ndarray | None = None
    zero_drift: bool = False

    def __post_init__(self):
        if self.c0 < 1:
            raise DomainError("ellipticity constant c0 must be >= 1")
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError("Hölder exponent of the drift must lie in [0, 1]")

    def sigma_at(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.sigma(t, x), dtype=float)

    def b_at(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.b(t, x), dtype=float)

    @property
    def is_constant(self) -> bool:
        return self.constant_sigma is not None and self.zero_drift


def _zero_drift(dim):
    def b(t, x):
        return np.zeros(np.shape(x))
    return b


def constant(matrix, drift=None, name="constant") -> CoefficientModel:
    """Constant sigma (and optionally constant drift vector)."""
    S = np.atleast_2d(np.asarray(matrix, dtype=float))
    d = S.shape[0]
    if S.shape != (d, d):
        raise DomainError("sigma must be a square matrix")
    sv = np.linalg.svd(S, compute_uv=False)
    if sv[-1] <= 0:
        raise AssumptionError("constant sigma is singular")
    c0 = float(max(sv[0], 1.0 / sv[-1], 1.0))

    def sigma(t, x):
        return np.broadcast_to(S, np.shape(x)[:-1] + (d, d))

    if drift is None:
        return CoefficientModel(
            sigma, _zero_drift(d), d, c0=c0, c1=0.0, beta=1.0, c3=0.0, name=name,
            kernel=KernelDescriptor(SIGMA_KINDS["const"], S.ravel().copy(),
                                    DRIFT_KINDS["zero"], np.zeros(1)),
            constant_sigma=S, zero_drift=True)
    v = np.asarray(drift, dtype=float).reshape(d)

    def b(t, x):
        return np.broadcast_to(v, np.shape(x)).copy()

    return CoefficientModel(
        sigma, b, d, c0=c0, c1=0.0, beta=1.0, c3=float(np.linalg.norm(v)), name=name,
        params={"drift": v.tolist()},
        kernel=KernelDescriptor(SIGMA_KINDS["const"], S.ravel().copy(),
                                DRIFT_KINDS["const"], v.copy()),
        constant_sigma=S)


def identity(dim: int = 1) -> CoefficientModel:
    return constant(np.eye(dim), name="identity")


def _diag_sine_sigma(a, d):
    def sigma(t, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (d,))
        idx = np.arange(d)
        out[..., idx, idx] = 1.0 + a * np.sin(x)
        return out
    return sigma


def _holder_b(c, beta):
    def b(t, x):
        s = np.sin(np.asarray(x, dtype=float))
        return c * np.sign(s) * np.abs(s) ** beta
    return b


def diag_sine(dim: int = 1, amplitude: float = 0.3, c0: float | None = None) -> CoefficientModel:
    """sigma(x) = diag(1 + a sin x_i), b = 0."""
    a = float(amplitude)
    if not 0 <= a < 1:
        raise DomainError("diag-sine amplitude must lie in [0, 1)")
    c0_min = max(1.0 + a, 1.0 / (1.0 - a))
    return CoefficientModel(
        _diag_sine_sigma(a, dim), _zero_drift(dim), dim,
        c0=float(c0 if c0 is not None else c0_min), c1=a, beta=1.0, c3=0.0,
        name="diag-sine", params={"amplitude": a},
        kernel=KernelDescriptor(SIGMA_KINDS["diag_sine"], np.array([a]),
                                DRIFT_KINDS["zero"], np.zeros(1)),
        zero_drift=True)


def rotation_mix(dim: int = 2, theta0: float = 0.3, eps: float = 0.2,
                 scales=None) -> CoefficientModel:
    """sigma(x) = R(theta0 + eps * sum_i sin x_i) diag(scales), rotation in the (x1, x2) plane."""
    if dim < 2:
        raise DomainError("rotation-mix needs dim >= 2")
    D = np.ones(dim) if scales is None else np.asarray(scales, dtype=float).reshape(dim)
    if np.any(D <= 0):
        raise DomainError("rotation-mix scales must be positive")

    def sigma(t, x):
        x = np.asarray(x, dtype=float)
        th = theta0 + eps * np.sum(np.sin(x), axis=-1)
        out = np.zeros(x.shape + (dim,))
        idx = np.arange(dim)
        out[..., idx, idx] = D
        c, s = np.cos(th), np.sin(th)
        out[..., 0, 0] = c * D[0]
        out[..., 0, 1] = -s * D[1]
        out[..., 1, 0] = s * D[0]
        out[..., 1, 1] = c * D[1]
        return out

    c0 = float(max(D.max(), 1.0 / D.min(), 1.0))
    c1 = float(abs(eps) * D[:2].max() * math.sqrt(dim))
    return CoefficientModel(
        sigma, _zero_drift(dim), dim, c0=c0, c1=c1, beta=1.0, c3=0.0,
        name="rotation-mix", params={"theta0": theta0, "eps": eps, "scales": D.tolist()},
        kernel=KernelDescriptor(SIGMA_KINDS["rotation_mix"],
                                np.concatenate([[theta0, eps], D]),
                                DRIFT_KINDS["zero"], np.zeros(1)),
        zero_drift=True)


def holder_drift(dim: int = 1, beta: float = 0.7, strength: float = 0.5,
                 amplitude: float = 0.3) -> CoefficientModel:
    """diag-sine sigma with b_i(x) = strength * sign(sin x_i) |sin x_i|^beta.

    The Hölder constant of u -> sign(u)|u|^beta is 2^(1-beta), and sin is
    1-Lipschitz, so c3 = strength * 2^(1-beta) * sqrt(dim) covers both |b|
    and the Hölder quotient.
    """
    a = float(amplitude)
    c3 = float(strength * 2.0 ** (1.0 - beta) * math.sqrt(dim))
    return CoefficientModel(
        _diag_sine_sigma(a, dim), _holder_b(strength, beta), dim,
        c0=max(1.0 + a, 1.0 / (1.0 - a)), c1=a, beta=float(beta), c3=c3,
        name="hölder-drift", params={"beta": beta, "strength": strength, "amplitude": a},
        kernel=KernelDescriptor(SIGMA_KINDS["diag_sine"], np.array([a]),
                                DRIFT_KINDS["holder"], np.array([strength, beta])))


def tabulated(axes, sigma_values, b_values=None, *, c0, c1, beta=1.0, c3=0.0,
              name="tabulated") -> CoefficientModel:
    """Time-independent coefficients given on a rectilinear x-grid.

    ``axes`` is a list of d increasing 1-d arrays; ``sigma_values`` has shape
    ``(n_1, ..., n_d, d, d)``; ``b_values`` has shape ``(n_1, ..., n_d, d)``.
    Values are interpolated multilinearly and held constant outside the grid.
    """
    from scipy.interpolate import RegularGridInterpolator

    axes = [np.asarray(a, dtype=float) for a in axes]
    d = len(axes)
    sv = np.asarray(sigma_values, dtype=float)
    if sv.shape != tuple(len(a) for a in axes) + (d, d):
        raise DomainError("sigma table shape does not match the axes")
    lo = np.array([a[0] for a in axes])
    hi = np.array([a[-1] for a in axes])
    s_interp = RegularGridInterpolator(axes, sv, method="linear")

    def sigma(t, x):
        x = np.clip(np.asarray(x, dtype=float), lo, hi)
        return s_interp(x.reshape(-1, d)).reshape(x.shape[:-1] + (d, d))

    if b_values is None:
        b = _zero_drift(d)
    else:
        bv = np.asarray(b_values, dtype=float)
        b_interp = RegularGridInterpolator(axes, bv, method="linear")

        def b(t, x):
            x = np.clip(np.asarray(x, dtype=float), lo, hi)
            return b_interp(x.reshape(-1, d)).reshape(x.shape)

    return CoefficientModel(sigma, b, d, c0=c0, c1=c1, beta=beta, c3=c3, name=name,
                            zero_drift=b_values is None)


PRESETS = {
    "identity": identity,
    "diag-sine": diag_sine,
    "rotation-mix": rotation_mix,
    "hölder-drift": holder_drift,
    "holder-drift": holder_drift,
}


def from_preset(name: str, dim: int = 1, **params) -> CoefficientModel:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown coefficient preset {name!r}; "
                          f"known: {sorted(set(PRESETS) - {'holder-drift'})}") from None
    return factory(dim=dim, **params)


@dataclass
class AssumptionReport:
    min_singular: float
    max_singular: float
    max_lipschitz: float
    max_holder: float
    max_drift: float
    passed: bool
    failures: list = field(default_factory=list)
    offending_points: list = field(default_factory=list)


def default_probe_grid(dim: int, n: int = 9, extent: float = math.pi, times=(0.0, 0.5, 1.0)):
    """Probe points: a tensor grid on [-extent, extent]^d at each time."""
    ax = np.linspace(-extent, extent, n)
    pts = np.array(list(itertools.product(ax, repeat=dim)))
    return [(float(t), pts) for t in times]


def validate_assumptions(model: CoefficientModel, probe_grid, rtol: float = 1e-9) -> AssumptionReport:
    """Check ellipticity, Lipschitz and Hölder bounds on sampled points.

    ``probe_grid`` is an iterable of ``(t, points)`` with ``points`` of shape
    ``(n, d)``. Difference quotients use every pair of points at equal time.
    """
    probes = [(float(t), np.atleast_2d(np.asarray(p, dtype=float))) for t, p in probe_grid]
    if not probes or sum(len(p) for _, p in probes) == 0:
        raise DomainError("probe grid is empty")
    smin, smax = math.inf, 0.0
    lip = hol = bmax = 0.0
    failures, offending = [], []
    for t, pts in probes:
        try:
            S = model.sigma_at(t, pts)
        except Exception as exc:  # report the first failing point
            for p in pts:
                try:
                    model.sigma_at(t, p[None, :])
                except Exception:
                    raise AssumptionError(f"sigma evaluation failed at t={t}, x={p.tolist()}: {exc}",
                                          point=(t, p.tolist())) from exc
            raise AssumptionError(f"sigma evaluation failed at t={t}: {exc}") from exc
        if not np.all(np.isfinite(S)):
            k = int(np.argwhere(~np.isfinite(S).reshape(len(pts), -1).all(axis=1))[0, 0])
            raise AssumptionError(f"sigma is not finite at t={t}, x={pts[k].tolist()}",
                                  point=(t, pts[k].tolist()))
        B = model.b_at(t, pts)
        sv = np.linalg.svd(S, compute_uv=False)
        lo, hi = sv[:, -1], sv[:, 0]
        for k in np.flatnonzero((lo < (1 - rtol) / model.c0) | (hi > model.c0 * (1 + rtol))):
            offending.append((t, pts[k].tolist()))
        smin, smax = min(smin, float(lo.min())), max(smax, float(hi.max()))
        bmax = max(bmax, float(np.max(np.linalg.norm(B, axis=-1))))
        if len(pts) > 1:
            i, j = np.triu_indices(len(pts), 1)
            dist = np.linalg.norm(pts[i] - pts[j], axis=-1)
            ok = dist > 0
            dS = np.linalg.norm(S[i] - S[j], ord=2, axis=(-2, -1))
            dB = np.linalg.norm(B[i] - B[j], axis=-1)
            if np.any(ok):
                lip = max(lip, float(np.max(dS[ok] / dist[ok])))
                hol = max(hol, float(np.max(dB[ok] / dist[ok] ** model.beta)))
    if offending:
        failures.append(f"ellipticity: singular values outside [1/{model.c0}, {model.c0}]")
    if lip > model.c1 * (1 + rtol) + 1e-14:
        failures.append(f"Lipschitz quotient {lip:.6g} exceeds c1={model.c1}")
    if hol > model.c3 * (1 + rtol) + 1e-14:
        failures.append(f"Hölder quotient {hol:.6g} exceeds c3={model.c3}")
    if bmax > model.c3 * (1 + rtol) + 1e-14:
        failures.append(f"drift bound {bmax:.6g} exceeds c3={model.c3}")
    return AssumptionReport(smin, smax, lip, hol, bmax, not failures, failures, offending)
