"""FFT analysis on periodic grids: Littlewood-Paley blocks, Besov and Hölder norms.

A :class:`GridFunction` samples a function on ``[-L, L)^d`` with ``N`` points
per axis; the frequency of FFT index ``k`` is ``pi k / L``. Norms are Riemann
sums with volume element ``(2L/N)^d`` (so the L^1 norm of a density is 1).
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, ResolutionError

__all__ = [
    "GridFunction",
    "DyadicDecomposition",
    "BesovNorm",
    "smooth_step",
    "bump_profile",
    "lp_norm",
    "block",
    "besov_norm",
    "holder_seminorm",
    "holder_norm",
    "sampled_holder_seminorm",
    "mollify",
    "mollifier_factor",
    "commutator_decay",
    "young_constants",
    "window",
]

MAGIC = b"CYLGRID1"
_HEADER = struct.Struct("<8sQQd")


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class GridFunction:
    """Real values on the periodic grid ``x_i = -L + i * 2L/N`` in every axis."""

    __slots__ = ("values", "L", "__dict__")

    def __init__(self, values, L: float):
        v = np.asarray(values, dtype=float)
        if v.ndim < 1:
            raise DomainError("grid function needs at least one axis")
        N = v.shape[0]
        if any(n != N for n in v.shape):
            raise DomainError("grid must have the same resolution on every axis")
        if not _is_pow2(N):
            raise DomainError(f"resolution must be a power of two, got {N}")
        if not L > 0:
            raise DomainError("box half-width must be positive")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid values must be finite")
        self.values = v
        self.L = float(L)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def cell(self) -> float:
        return self.dx ** self.dim

    def axis(self) -> np.ndarray:
        return axis_nodes(self.N, self.L)

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``(N, ..., N, d)``."""
        return grid_points(self.N, self.L, self.dim)

    @classmethod
    def from_callable(cls, func, N: int, L: float, dim: int = 1) -> "GridFunction":
        """Sample ``func(x)`` with ``x`` of shape ``(..., d)``."""
        return cls(func(grid_points(N, L, dim)), L)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(values, self.L)

    def fft(self) -> np.ndarray:
        return np.fft.rfftn(self.values)

    def xi_norm(self) -> np.ndarray:
        """|xi| on the rfft layout."""
        return rfft_xi_norm(self.N, self.L, self.dim)

    def gradient(self) -> np.ndarray:
        """Spectral gradient, shape ``(d, N, ..., N)``; the Nyquist mode is dropped."""
        F = self.fft()
        nyq = math.pi * self.N / (2.0 * self.L)
        out = []
        for xi in rfft_xi_axes(self.N, self.L, self.dim):
            xi = np.where(np.abs(np.abs(xi) - nyq) < 1e-9 * nyq, 0.0, xi)
            out.append(_irfft(1j * xi * F, self.values.shape))
        return np.array(out)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other))

    __rmul__ = __mul__

    # serialisation
    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, self.dim, self.N, self.L)
        return head + np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridFunction":
        if len(data) < _HEADER.size:
            raise DomainError("truncated grid file")
        magic, d, N, L = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise DomainError("not a grid-function file (bad magic)")
        count = N ** d
        body = data[_HEADER.size:]
        if len(body) != 8 * count:
            raise DomainError(f"expected {count} values, found {len(body) // 8}")
        vals = np.frombuffer(body, dtype="<f8").astype(float).reshape((N,) * d)
        return cls(vals, L)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "GridFunction":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def to_csv(self, path=None) -> str:
        """Columns ``x1, ..., xd, value``; written to ``path`` if given."""
        pts = self.points().reshape(-1, self.dim)
        buf = io.StringIO()
        buf.write(",".join([f"x{i + 1}" for i in range(self.dim)] + ["value"]) + "\n")
        for row, v in zip(pts, self.values.ravel()):
            buf.write(",".join(repr(float(c)) for c in row) + "," + repr(float(v)) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def __repr__(self):
        return f"GridFunction(d={self.dim}, N={self.N}, L={self.L})"


def _vals(other):
    return other.values if isinstance(other, GridFunction) else other


def _irfft(F, shape):
    return np.fft.irfftn(F, s=shape, axes=tuple(range(len(shape))))


def axis_nodes(N: int, L: float) -> np.ndarray:
    return -L + (2.0 * L / N) * np.arange(N)


def grid_points(N: int, L: float, dim: int) -> np.ndarray:
    ax = axis_nodes(N, L)
    return np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1)


def rfft_xi_axes(N: int, L: float, dim: int):
    """Broadcastable frequency arrays (one per axis) for the rfftn layout."""
    full = np.fft.fftfreq(N, d=1.0 / N) * (math.pi / L)
    half = np.fft.rfftfreq(N, d=1.0 / N) * (math.pi / L)
    out = []
    for ax in range(dim):
        v = half if ax == dim - 1 else full
        shape = [1] * dim
        shape[ax] = v.size
        out.append(v.reshape(shape))
    return out


def rfft_xi_norm(N: int, L: float, dim: int) -> np.ndarray:
    axes = rfft_xi_axes(N, L, dim)
    sq = sum(a * a for a in axes)
    return np.sqrt(sq)


def lp_norm(values, p, cell: float) -> float:
    """Riemann-sum L^p norm with volume element ``cell``; ``p`` may be ``inf``."""
    v = np.abs(np.asarray(values, dtype=float))
    if p == math.inf or p == "inf":
        return float(v.max()) if v.size else 0.0
    p = float(p)
    if p < 1:
        raise DomainError("p must be at least 1")
    if p == 1:
        return float(v.sum() * cell)
    return float((np.sum(v ** p) * cell) ** (1.0 / p))


def smooth_step(x):
    """C-infinity step: 1 for x <= 0, 0 for x >= 1, built from exp(-1/x)."""
    x = np.asarray(x, dtype=float)
    a = np.clip(1.0 - x, 0.0, 1.0)
    b = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        ea = np.where(a > 0, np.exp(-1.0 / np.where(a > 0, a, 1.0)), 0.0)
        eb = np.where(b > 0, np.exp(-1.0 / np.where(b > 0, b, 1.0)), 0.0)
    return ea / (ea + eb)


def bump_profile(r):
    """phi_0 as a function of |xi|: 1 on [0, 1], 0 on [2, inf)."""
    return smooth_step(np.asarray(r, dtype=float) - 1.0)


@dataclass(frozen=True)
class DyadicDecomposition:
    """Littlewood-Paley partition adapted to a grid ``(N, L, d)``.

    ``ring(j, r)`` is defined for every j >= 0 so that neighbouring blocks can
    be formed past ``j_max``; :func:`block` only accepts ``j <= j_max``, the
    largest ring whose support stays below the Nyquist frequency.
    """

    N: int
    L: float
    dim: int = 1

    def __post_init__(self):
        if not _is_pow2(int(self.N)):
            raise DomainError("resolution must be a power of two")

    @property
    def nyquist(self) -> float:
        return math.pi * self.N / (2.0 * self.L)

    @property
    def j_max(self) -> int:
        # largest j with 2^(j+1) <= nyquist
        if self.nyquist < 2.0:
            return -1
        j = int(math.floor(math.log2(self.nyquist))) - 1
        while 2.0 ** (j + 1) > self.nyquist:  # guard against log2 rounding
            j -= 1
        return j

    @staticmethod
    def ring(j: int, r):
        r = np.asarray(r, dtype=float)
        if j < 0:
            return np.zeros_like(r)
        if j == 0:
            return bump_profile(r)
        return bump_profile(r * 2.0 ** -j) - bump_profile(r * 2.0 ** (1 - j))

    @cached_property
    def _xi(self):
        return rfft_xi_norm(self.N, self.L, self.dim)

    def multiplier(self, j: int) -> np.ndarray:
        """phi_j on the rfft layout of this grid."""
        return self.ring(j, self._xi)

    def partial_sum(self, k: int) -> np.ndarray:
        return sum(self.multiplier(j) for j in range(k + 1))

    @classmethod
    def for_grid(cls, f: GridFunction) -> "DyadicDecomposition":
        return cls(f.N, f.L, f.dim)


def _dec_for(f, dec):
    if dec is None:
        return DyadicDecomposition.for_grid(f)
    if (dec.N, dec.L, dec.dim) != (f.N, f.L, f.dim):
        raise DomainError("decomposition was built for a different grid")
    return dec


def block(j: int, f: GridFunction, dec: DyadicDecomposition | None = None) -> GridFunction:
    """R_j f computed as an FFT multiplier."""
    dec = _dec_for(f, dec)
    if j < 0 or j > dec.j_max:
        raise DomainError(f"block index {j} outside [0, {dec.j_max}] for this grid")
    return f.with_values(_apply(f, dec.multiplier(j)))


def _apply(f: GridFunction, mult) -> np.ndarray:
    return _irfft(f.fft() * mult, f.values.shape)


@dataclass(frozen=True)
class BesovNorm:
    value: float
    j_max: int
    block_norms: tuple = field(default=())

    def __float__(self):
        return float(self.value)


def besov_norm(f: GridFunction, s: float, p=math.inf, q=math.inf,
               dec: DyadicDecomposition | None = None) -> BesovNorm:
    """(sum_j 2^{sqj} ||R_j f||_p^q)^{1/q} over 0 <= j <= j_max; max over j when q = inf."""
    dec = _dec_for(f, dec)
    F = f.fft()
    norms = []
    for j in range(dec.j_max + 1):
        vals = _irfft(F * dec.multiplier(j), f.values.shape)
        norms.append(lp_norm(vals, p, f.cell))
    w = np.array([2.0 ** (s * j) * n for j, n in enumerate(norms)])
    if not w.size:
        value = 0.0
    elif q == math.inf or q == "inf":
        value = float(w.max())
    else:
        q = float(q)
        if q < 1:
            raise DomainError("q must be at least 1")
        value = float(np.sum(w ** q) ** (1.0 / q))
    return BesovNorm(value, dec.j_max, tuple(norms))


def _dyadic_lags(n_max: int):
    lags, k = [], 1
    while k <= n_max:
        lags.append(k)
        k *= 2
    return lags


def _periodic_seminorm(values, dx, gamma):
    N = values.shape[0]
    best = 0.0
    for lag in _dyadic_lags(N // 2):
        h = lag * dx
        for ax in range(values.ndim):
            diff = np.abs(np.roll(values, -lag, axis=ax) - values)
            best = max(best, float(diff.max()) / h ** gamma)
    return best


def holder_seminorm(f: GridFunction, gamma: float) -> float:
    """Grid sup of |f(x + h e_i) - f(x)| / h^gamma over dyadic lags up to L.

    For gamma in (1, 2) the (gamma - 1)-seminorm of the spectral gradient is
    used instead.
    """
    if not 0 < gamma < 2:
        raise DomainError("Hölder exponent must lie in (0, 2)")
    if gamma <= 1:
        return _periodic_seminorm(f.values, f.dx, gamma)
    grad = f.gradient()
    return max(_periodic_seminorm(g, f.dx, gamma - 1.0) for g in grad)


def holder_norm(f: GridFunction, gamma: float) -> float:
    """sup |f| (+ sup |grad f| when gamma > 1) + gamma-seminorm."""
    total = float(np.abs(f.values).max()) + holder_seminorm(f, gamma)
    if gamma > 1:
        total += float(np.abs(f.gradient()).max())
    return total


def sampled_holder_seminorm(values, spacing: float, gamma: float, max_lag: int | None = None) -> float:
    """Hölder quotient of samples on a uniform 1-d stencil (not periodic).

    Uses lags ``spacing * 2^k`` up to ``max_lag`` points. For gamma in (1, 2),
    the (gamma - 1) seminorm of the centred finite-difference derivative.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise DomainError("need at least two samples on a line")
    if not 0 < gamma < 2:
        raise DomainError("Hölder exponent must lie in (0, 2)")
    if gamma > 1:
        if v.size < 4:
            raise DomainError("need at least four samples for gamma > 1")
        deriv = (v[2:] - v[:-2]) / (2 * spacing)
        return sampled_holder_seminorm(deriv, spacing, gamma - 1.0, max_lag)
    n_max = v.size - 1 if max_lag is None else min(max_lag, v.size - 1)
    best = 0.0
    for lag in _dyadic_lags(n_max):
        diff = np.abs(v[lag:] - v[:-lag])
        best = max(best, float(diff.max()) / (lag * spacing) ** gamma)
    return best


def _mollifier_values(N, L, dim, eps):
    ax = axis_nodes(N, L)
    # periodic distance to the origin
    ax = np.minimum(np.abs(ax), 2 * L - np.abs(ax))
    r2 = sum(np.meshgrid(*([ax * ax] * dim), indexing="ij")) / eps ** 2
    inside = r2 < 1.0
    out = np.zeros(r2.shape)
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def mollifier_factor(N: int, L: float, dim: int, eps: float) -> np.ndarray:
    """Fourier factor of the grid mollifier (rfft layout), equal to 1 at xi = 0."""
    if not 0 < eps < L:
        raise DomainError("mollifier radius must lie in (0, L)")
    rho = _mollifier_values(N, L, dim, eps)
    mass = rho.sum()
    if mass == 0:
        rho = np.zeros_like(rho)
        rho[(N // 2,) * dim] = 1.0
        mass = 1.0
    rho = rho / mass
    # nodes start at -L, shift so the kernel centre sits at index 0
    rho = np.roll(rho, [-(N // 2)] * dim, axis=tuple(range(dim)))
    return np.fft.rfftn(rho)


def mollify(f: GridFunction, eps: float) -> GridFunction:
    """Convolution with a smooth bump supported in the ball of radius eps, unit mass."""
    fac = mollifier_factor(f.N, f.L, f.dim, eps)
    return f.with_values(_apply(f, fac))


def commutator_decay(f: GridFunction, g: GridFunction, j: int, p=math.inf,
                     dec: DyadicDecomposition | None = None) -> float:
    """||R_j(f g) - f R_j g||_p."""
    if (f.N, f.L, f.dim) != (g.N, g.L, g.dim):
        raise DomainError("f and g must live on the same grid")
    dec = _dec_for(f, dec)
    fg = block(j, f * g, dec).values
    fRg = f.values * block(j, g, dec).values
    return lp_norm(fg - fRg, p, f.cell)


def young_constants(dec: DyadicDecomposition) -> np.ndarray:
    """||inverse transform of phi_j||_1 for j = 0..j_max on the grid."""
    shape = (dec.N,) * dec.dim
    cell = (2 * dec.L / dec.N) ** dec.dim
    out = []
    for j in range(dec.j_max + 1):
        kern = _irfft(dec.multiplier(j), shape) / cell
        out.append(float(np.abs(kern).sum() * cell))
    return np.array(out)


def window(f: GridFunction, radius_frac: float = 0.9):
    """Multiply by a smooth radial cutoff: 1 inside radius_frac * L, 0 at |x| >= L.

    Returns the windowed function and the L^1 mass removed.
    """
    if not 0 < radius_frac < 1:
        raise DomainError("radius fraction must lie in (0, 1)")
    r = np.linalg.norm(f.points(), axis=-1)
    r0 = radius_frac * f.L
    w = smooth_step((r - r0) / (f.L - r0))
    tail = float(np.sum(np.abs(f.values) * (1.0 - w)) * f.cell)
    return f.with_values(f.values * w), tail


def require_resolution(N: int, needed: int):
    if N < needed:
        raise ResolutionError(f"grid resolution {N} too small, need {needed}", suggested_n=needed)
