"""Heat kernels of frozen (constant-coefficient) cylindrical stable generators.

For constant sigma the generator is the Fourier multiplier
psi(xi) = -c_alpha * sum_i |(sigma^T xi)_i|^alpha and the transition density
p_{s,t} is the inverse transform of exp((t - s) psi).

On a periodic box the FFT returns the periodised density
sum_m p(x + 2Lm). In one dimension the images m != 0 are removed with the
convergent (alpha < 1) or asymptotic (alpha >= 1) series of the stable
density, summed over the lattice through the Hurwitz zeta function.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special
from scipy.integrate import trapezoid

from .errors import AssumptionError, DomainError, ResolutionError
from .fitting import ScalingFit, fit_exponent
from .noise import StableSpec
from .spectral import (DyadicDecomposition, GridFunction, _irfft, grid_points, rfft_xi_axes,
                       window)

__all__ = [
    "FrozenSymbol",
    "frozen_symbol",
    "symbol_lower_bound",
    "KernelSlice",
    "kernel",
    "Moment",
    "moment_integral",
    "block_kernel_decay",
    "block_decay_fit",
    "duhamel_solve",
    "weak_residual",
    "stable_series_density",
    "DECAY_TOL",
]

DECAY_TOL = 1e-14
_PAD_RATIO = 8.0       # box half-width / kernel scale needed before images are series-summed
_MAX_PADDED = 1 << 23
_CHEB_DEG = 96


@dataclass(frozen=True)
class FrozenSymbol:
    """psi(xi) = -c_alpha sum_i |(sigma^T xi)_i|^alpha for a constant matrix sigma."""

    alpha: float
    sigma: np.ndarray
    c_alpha: float

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.dim == 1 and (xi.ndim == 0 or xi.shape[-1] != 1):
            return -self.c_alpha * np.abs(xi * self.sigma[0, 0]) ** self.alpha
        proj = xi @ self.sigma
        return -self.c_alpha * np.sum(np.abs(proj) ** self.alpha, axis=-1)

    def on_axes(self, axes) -> np.ndarray:
        """psi on a broadcast grid given by one frequency array per axis."""
        d = self.dim
        total = 0.0
        for i in range(d):
            proj = sum(axes[k] * self.sigma[k, i] for k in range(d))
            total = total + np.abs(proj) ** self.alpha
        return -self.c_alpha * total

    @property
    def scale_1d(self) -> float:
        """|sigma| in one dimension."""
        return abs(float(self.sigma[0, 0]))

    def kernel_scale(self, tau: float) -> float:
        """Length scale (c_alpha tau)^(1/alpha) * ||sigma||."""
        return (self.c_alpha * tau) ** (1.0 / self.alpha) * float(np.linalg.norm(self.sigma, 2))


def frozen_symbol(sigma_const, alpha: float) -> FrozenSymbol:
    """Multiplier of the generator with sigma frozen at a constant matrix."""
    spec = StableSpec(alpha, 1)
    S = np.atleast_2d(np.asarray(sigma_const, dtype=float))
    if S.shape[0] != S.shape[1]:
        raise DomainError("sigma must be square")
    sv = np.linalg.svd(S, compute_uv=False)
    if not np.all(np.isfinite(sv)) or sv[-1] <= 1e-12 * max(sv[0], 1e-300):
        raise AssumptionError("sigma is singular; uniform ellipticity requires "
                              "singular values bounded away from 0")
    S = S.copy()
    S.setflags(write=False)
    return FrozenSymbol(spec.alpha, S, spec.c_alpha)


def _sphere_directions(d: int, n: int, seed: int = 0) -> np.ndarray:
    if d == 1:
        return np.array([[1.0]])
    if d == 2:
        th = np.linspace(0.0, math.pi, n, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, d))
    v = np.concatenate([v, np.eye(d)])
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def symbol_lower_bound(sym: FrozenSymbol, n_radii: int = 41, n_dirs: int = 720,
                       r_range=(1e-3, 1e3)):
    """Fitted c2 = min -psi(xi) / min(|xi|^2, |xi|^alpha) over a log-spaced xi grid.

    Returns ``(c2, argmin_xi)``.
    """
    radii = np.geomspace(r_range[0], r_range[1], n_radii)
    dirs = _sphere_directions(sym.dim, n_dirs)
    xi = radii[:, None, None] * dirs[None, :, :]
    r = radii[:, None]
    ratio = -sym(xi) / np.minimum(r ** 2, r ** sym.alpha)
    k = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    return float(ratio[k]), xi[k]


# ---------------------------------------------------------------- 1-d series

def _series_coeffs(alpha: float, kmax: int = 400):
    """c_k with p(x) = sum_k c_k s^(alpha k) |x|^(-alpha k - 1) for unit-scale stable law."""
    k = np.arange(1, kmax + 1, dtype=float)
    logmag = special.gammaln(alpha * k + 1) - special.gammaln(k + 1)
    sign = np.where(k % 2 == 1, 1.0, -1.0) * np.sin(k * math.pi * alpha / 2)
    return k, logmag, sign / math.pi


def _poch(q, n):
    out = 1.0
    for i in range(n):
        out = out * (q + i)
    return out


def _series_terms(alpha, ratio, weight, tol=1e-18, kmax=400):
    """Coefficients a_k = c_k ratio^(alpha k) * weight(k), truncated adaptively.

    ``ratio`` is scale/distance (< 1). Terms are kept while they shrink; the
    sum is cut once they fall below ``tol`` relative to the partial sum, or at
    the smallest term of an asymptotic series.
    """
    k, logmag, sign = _series_coeffs(alpha, kmax)
    out = []
    total = 0.0
    prev = math.inf
    for kk, lm, sg in zip(k, logmag, sign):
        w = weight(kk)
        mag = math.exp(lm + alpha * kk * math.log(ratio)) * abs(w)
        if sg == 0.0 or mag == 0.0:
            continue
        if mag > prev and kk > 2:
            break
        out.append((kk, sg * math.exp(lm + alpha * kk * math.log(ratio)) * w))
        total += out[-1][1]
        prev = mag
        if mag < tol * abs(total):
            break
    return out


def stable_series_density(x, alpha: float, scale: float, n: int = 0):
    """n-th derivative of the symmetric stable density with cf exp(-|scale xi|^alpha).

    Series in |x|^(-alpha k - 1), valid for |x| well beyond ``scale``.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    rmin = float(ax.min())
    terms = _series_terms(alpha, scale / rmin, lambda k: _poch(alpha * k + 1, n))
    out = np.zeros_like(ax)
    for kk, a in terms:
        q = alpha * kk + 1
        out += a * (ax / rmin) ** (-q - n)
    out *= rmin ** (-1.0 - n)
    # d^n/dx^n of an even function of x: sign (-1)^n for x > 0, +1 for x < 0
    return np.where(x > 0, (-1.0) ** n, 1.0) * out


def _image_sum(u, alpha, scale, L, n):
    """sum_{m != 0} p^(n)(2L(u + m)) for u in [-1/2, 1/2]."""
    terms = _series_terms(alpha, scale / L, lambda k: _poch(alpha * k + 1, n))

    def f(v):
        acc = np.zeros_like(v)
        for kk, a in terms:
            q = alpha * kk + 1 + n
            # a carries (scale/L)^(alpha k); lattice distances are in units of 2L
            coef = a * 2.0 ** (-q)
            acc += coef * ((-1.0) ** n * special.zeta(q, 1.0 + v) + special.zeta(q, 1.0 - v))
        return acc * L ** (-1.0 - n)

    cheb = np.polynomial.Chebyshev.interpolate(f, _CHEB_DEG, domain=[-0.5, 0.5])
    return cheb(u)


def _series_tail_mass(alpha, scale, L):
    """int_{|x| > L} p(x) dx from the density series."""
    terms = _series_terms(alpha, scale / L, lambda k: 1.0 / (alpha * k))
    return float(2.0 * sum(a for _, a in terms))


def _series_tail_moment(alpha, scale, L, n, beta):
    """int_{|x| > L} |x|^beta |p^(n)(x)| dx, assuming p^(n) keeps its sign beyond L."""
    terms = _series_terms(alpha, scale / L,
                          lambda k: _poch(alpha * k + 1, n) / (alpha * k + n - beta))
    return float(2.0 * abs(sum(a for _, a in terms)) * L ** (beta - n))


# ---------------------------------------------------------------- kernels

def _required_n(sym, tau, L, dim):
    # need tau * |psi| >= log(1/DECAY_TOL) on the boundary of the frequency box
    dirs = _sphere_directions(dim, 256)
    dirs = dirs / np.max(np.abs(dirs), axis=-1, keepdims=True)
    worst = float(np.min(-sym(dirs)))
    target = math.log(1.0 / DECAY_TOL)
    nyq = (target / (tau * worst)) ** (1.0 / sym.alpha)
    n = 2.0 * L * nyq / math.pi
    return 1 << max(1, math.ceil(math.log2(n)))


def _check_decay(sym, tau, N, L, dim):
    nyq = math.pi * N / (2.0 * L)
    dirs = _sphere_directions(dim, 256)
    dirs = dirs / np.max(np.abs(dirs), axis=-1, keepdims=True)
    worst = float(np.max(np.exp(tau * sym(nyq * dirs))))
    if worst > DECAY_TOL:
        need = _required_n(sym, tau, L, dim)
        raise ResolutionError(
            f"exp((t-s) psi) = {worst:.3g} at the Nyquist frequency exceeds {DECAY_TOL:g}; "
            f"use N >= {need} (or a larger t - s / smaller L)", suggested_n=need)


def _shift_sign(N, dim):
    # nodes start at -L: e^{i xi_k x_n} = (-1)^k e^{2 pi i k n / N}
    full = np.where(np.arange(N) % 2 == 0, 1.0, -1.0)
    half = full[: N // 2 + 1]
    out = 1.0
    for ax in range(dim):
        v = half if ax == dim - 1 else full
        shape = [1] * dim
        shape[ax] = v.size
        out = out * v.reshape(shape)
    return out


def _periodised(hat, N, L, dim):
    vals = _irfft(hat * _shift_sign(N, dim), (N,) * dim)
    return vals * (N / (2.0 * L)) ** dim


@dataclass
class KernelSlice:
    """Density p_{s,t} on a grid, with spectral derivatives on demand.

    ``tail_mass`` is the probability outside the box (series value in one
    dimension, windowing estimate otherwise).
    """

    s: float
    t: float
    density: GridFunction
    symbol: FrozenSymbol
    tail_mass: float
    padding: int = 1
    dealiased: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def tau(self) -> float:
        return self.t - self.s

    @property
    def N(self) -> int:
        return self.density.N

    @property
    def L(self) -> float:
        return self.density.L

    @property
    def scale(self) -> float:
        return self.symbol.kernel_scale(self.tau)

    def derivative(self, n: int) -> np.ndarray:
        """n-th derivative (d = 1), gradient (d > 1, n = 1, shape (d, ...)) or Hessian (n = 2)."""
        if n == 0:
            return self.density.values
        if n not in (1, 2):
            raise DomainError("derivative order must be 0, 1 or 2")
        if n not in self._cache:
            self._cache[n] = _kernel_values(self.symbol, self.tau, self.N, self.L, n,
                                            self.padding, self.dealiased)
        return self._cache[n]

    def derivative_magnitude(self, n: int) -> np.ndarray:
        """|p^(n)| pointwise: absolute value (d = 1), Euclidean/Frobenius norm otherwise."""
        v = self.derivative(n)
        if n == 0 or self.density.dim == 1:
            return np.abs(v)
        axes = tuple(range(v.ndim - self.density.dim))
        return np.sqrt(np.sum(v * v, axis=axes))

    def mass(self) -> float:
        return float(self.density.values.sum() * self.density.cell)

    def metadata(self) -> dict:
        return {
            "alpha": self.symbol.alpha,
            "sigma": self.symbol.sigma.tolist(),
            "s": self.s,
            "t": self.t,
            "tail_mass": self.tail_mass,
            "N": self.N,
            "L": self.L,
            "d": self.density.dim,
            "padding": self.padding,
            "dealiased": self.dealiased,
        }

    def save(self, path) -> str:
        """Write the density in the grid binary format plus ``<path>.json`` metadata."""
        self.density.save(path)
        side = str(path) + ".json"
        with open(side, "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return side


def _padding_factor(scale, L):
    p = 1
    while p * L < _PAD_RATIO * scale:
        p *= 2
    return p


def _kernel_values(sym, tau, N, L, n, pad, dealias):
    dim = sym.dim
    Np, Lp = N * pad, L * pad
    if Np ** dim > _MAX_PADDED:
        raise ResolutionError(f"box half-width {L} is too small for kernel scale "
                              f"{sym.kernel_scale(tau):.3g}; padded grid would need {Np}^{dim} nodes")
    axes = rfft_xi_axes(Np, Lp, dim)
    hat = np.exp(tau * sym.on_axes(axes))
    if n == 0:
        mults = [hat]
    elif dim == 1:
        mults = [hat * (1j * axes[0]) ** n]
    elif n == 1:
        mults = [hat * 1j * axes[i] for i in range(dim)]
    else:
        mults = [hat * -(axes[i] * axes[k]) for i in range(dim) for k in range(dim)]
    vals = np.array([_periodised(m, Np, Lp, dim) for m in mults])
    if pad > 1:
        lo = (pad - 1) * N // 2
        sl = (slice(None),) + (slice(lo, lo + N),) * dim
        vals = vals[sl]
    if dealias:
        x = grid_points(N, L, 1)[..., 0]
        scale = (sym.c_alpha * tau) ** (1.0 / sym.alpha) * sym.scale_1d
        vals[0] -= _image_sum(x / (2.0 * Lp), sym.alpha, scale, Lp, n)
    if n == 0 or dim == 1:
        return vals[0]
    if n == 1:
        return vals
    return vals.reshape((dim, dim) + (N,) * dim)


def kernel(sym: FrozenSymbol, s: float, t: float, N: int, L: float, *,
           dealias: bool = True) -> KernelSlice:
    """Transition density p_{s,t} on the grid ``(N, L)``.

    In one dimension the periodisation images are removed (``dealias``); if
    the box is narrow compared to the kernel scale the FFT is done on a box
    enlarged by a power of two and cropped, which keeps ``L / scale`` the only
    input to that choice.
    """
    if not t > s:
        raise DomainError("need t > s")
    tau = float(t - s)
    dim = sym.dim
    if N < 2 or N & (N - 1):
        raise DomainError("N must be a power of two")
    _check_decay(sym, tau, N, L, dim)
    scale = sym.kernel_scale(tau)
    pad = _padding_factor(scale, L) if dim == 1 else 1
    dealias = bool(dealias and dim == 1)
    vals = _kernel_values(sym, tau, N, L, 0, pad, dealias)
    density = GridFunction(vals, L)
    if dim == 1:
        tail = _series_tail_mass(sym.alpha, (sym.c_alpha * tau) ** (1 / sym.alpha) * sym.scale_1d, L)
    else:
        _, tail = window(density, 0.9)
    return KernelSlice(float(s), float(t), density, sym, float(tail), pad, dealias)


@dataclass(frozen=True)
class Moment:
    value: float
    tail: float
    box: float

    def __float__(self):
        return float(self.value)


def moment_integral(k: KernelSlice, n: int = 0, beta: float = 0.0) -> Moment:
    """int |x|^beta |grad^n p_{s,t}(x)| dx.

    One dimension: Riemann sum over the box plus the series value of the
    integral beyond it (``tail``). Higher dimension: Riemann sum of the
    windowed integrand; ``tail`` is the removed part of the window.
    """
    alpha = k.symbol.alpha
    if not 0 <= beta < alpha:
        raise DomainError(f"moment exponent beta={beta} must lie in [0, alpha={alpha}); "
                          "the integral diverges otherwise")
    if n not in (0, 1, 2):
        raise DomainError("derivative order must be 0, 1 or 2")
    pts = k.density.points()
    r = np.linalg.norm(pts, axis=-1)
    integrand = r ** beta * k.derivative_magnitude(n)
    cell = k.density.cell
    if k.density.dim == 1:
        box = float(integrand.sum() * cell)
        scale = (k.symbol.c_alpha * k.tau) ** (1 / alpha) * k.symbol.scale_1d
        tail = _series_tail_moment(alpha, scale, k.L, n, beta)
        return Moment(box + tail, tail, box)
    g, removed = window(GridFunction(integrand, k.L), 0.9)
    box = float(g.values.sum() * cell)
    return Moment(box, removed, box)


# ---------------------------------------------------------------- blocks

def block_kernel_decay(sym: FrozenSymbol, s: float, t: float, j: int, n: int = 0,
                       beta: float = 0.0, dec: DyadicDecomposition | None = None,
                       refine: int = 4) -> float:
    """m_beta(|grad^n R_j p_{s,t}|) = int |x|^beta |grad^n R_j p_{s,t}(x)| dx.

    Built directly from the multiplier phi_j exp((t-s) psi) (i xi)^n, which
    is compactly supported, so no decay condition on exp((t-s) psi) is
    needed. The inverse transform is evaluated on a grid ``refine`` times
    finer than ``dec`` (zero padding) before taking absolute values.
    """
    if dec is None:
        raise DomainError("a DyadicDecomposition is required")
    if not t > s:
        raise DomainError("need t > s")
    if j < 0 or j > dec.j_max:
        raise DomainError(f"block index {j} outside [0, {dec.j_max}]")
    if n not in (0, 1, 2):
        raise DomainError("derivative order must be 0, 1 or 2")
    if beta < 0:
        raise DomainError("beta must be non-negative")
    dim = dec.dim
    if sym.dim != dim:
        raise DomainError("symbol and decomposition dimensions differ")
    tau = t - s
    Nr = dec.N * refine
    axes = rfft_xi_axes(Nr, dec.L, dim)
    r = np.sqrt(sum(a * a for a in axes))
    base = DyadicDecomposition.ring(j, r) * np.exp(tau * sym.on_axes(axes))
    if n == 0:
        mults = [base]
    elif n == 1:
        mults = [base * 1j * axes[i] for i in range(dim)]
    else:
        mults = [base * -(axes[i] * axes[k]) for i in range(dim) for k in range(dim)]
    vals = np.array([_periodised(m, Nr, dec.L, dim) for m in mults])
    mag = np.sqrt(np.sum(vals * vals, axis=0))
    x = grid_points(Nr, dec.L, dim)
    rad = np.linalg.norm(x, axis=-1)
    cell = (2.0 * dec.L / Nr) ** dim
    return float(np.sum(rad ** beta * mag) * cell)


def block_decay_fit(sym: FrozenSymbol, t: float, n: int, beta: float, js: Sequence[int],
                    dec: DyadicDecomposition) -> ScalingFit:
    """Fit log m_beta(|grad^n R_j p_{0,t}|) against log 2^j; the slope is the j-exponent."""
    vals = [block_kernel_decay(sym, 0.0, t, j, n, beta, dec) for j in js]
    return fit_exponent(x=[2.0 ** j for j in js], y=vals)


# ---------------------------------------------------------------- Duhamel

def _symbol_at(sym, time):
    return sym(time) if callable(sym) and not isinstance(sym, FrozenSymbol) else sym


def duhamel_solve(sym, phi: GridFunction, f, t_grid) -> list:
    """u(t_k) = P_{0,t_k} phi + int_0^{t_k} P_{s,t_k} f(s) ds on every node of ``t_grid``.

    ``f`` is a list of GridFunctions aligned with ``t_grid``, a callable
    ``time -> GridFunction``, or ``None`` for no forcing. ``sym`` may be a
    callable ``time -> FrozenSymbol``; it is then frozen at each interval's
    midpoint. The time integral is the trapezoid rule on ``t_grid``.
    """
    tg = np.asarray(t_grid, dtype=float)
    if tg.ndim != 1 or tg.size < 1 or tg[0] != 0.0 or np.any(np.diff(tg) <= 0):
        raise DomainError("t_grid must start at 0 and increase strictly")
    shape = phi.values.shape
    axes = rfft_xi_axes(phi.N, phi.L, phi.dim)

    def forcing(k):
        if f is None:
            return None
        g = f(tg[k]) if callable(f) else f[k]
        return np.fft.rfftn(g.values)

    u_hat = np.fft.rfftn(phi.values)
    out = [phi.with_values(phi.values.copy())]
    f_prev = forcing(0)
    cache = {}
    for k in range(1, tg.size):
        dt = tg[k] - tg[k - 1]
        sk = _symbol_at(sym, 0.5 * (tg[k] + tg[k - 1]))
        key = (id(sk), dt)
        if key not in cache:
            cache.clear()
            cache[key] = np.exp(dt * sk.on_axes(axes))
        E = cache[key]
        f_next = forcing(k)
        u_hat = E * u_hat
        if f_next is not None:
            u_hat = u_hat + 0.5 * dt * (E * f_prev + f_next)
        f_prev = f_next
        out.append(phi.with_values(_irfft(u_hat, shape)))
    return out


def weak_residual(sym, phi: GridFunction, f, t_grid, u, test: GridFunction) -> float:
    """<u(T), w> - <phi, w> - int <u, L w> - int <f, w> with both time integrals by trapezoid.

    ``L w`` is applied through the symbol (the generator is symmetric).
    """
    tg = np.asarray(t_grid, dtype=float)
    cell = phi.cell
    axes = rfft_xi_axes(phi.N, phi.L, phi.dim)
    w_hat = np.fft.rfftn(test.values)
    w = test.values

    def Lw(time):
        s_ = _symbol_at(sym, time)
        return _irfft(s_.on_axes(axes) * w_hat, w.shape)

    def pair(a, b):
        return float(np.sum(a * b) * cell)

    gen = np.array([pair(u[k].values, Lw(tg[k])) for k in range(tg.size)])
    if f is None:
        frc = np.zeros(tg.size)
    else:
        frc = np.array([pair((f(tg[k]) if callable(f) else f[k]).values, w) for k in range(tg.size)])
    return (pair(u[-1].values, w) - pair(phi.values, w)
            - float(trapezoid(gen, tg)) - float(trapezoid(frc, tg)))
