"""Monte Carlo semigroups P_{s,t} phi(x) = E phi(X_{s,t}(x)) and related estimators.

All estimators consume paths chunk by chunk and add the per-chunk sums in
chunk order, so results depend only on (seed, configuration), never on the
thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.integrate import trapezoid

from ._quad import cos_tail
from .errors import DomainError, QuadratureError
from .models import CoefficientModel
from .noise import StableSpec
from .sde import PathBatch, simulate
from .spectral import GridFunction, _irfft, grid_points, rfft_xi_axes, sampled_holder_seminorm

__all__ = [
    "MCConfig",
    "QuadConfig",
    "SemigroupEstimate",
    "GradientSup",
    "estimate_semigroup",
    "gradient_sup",
    "holder_seminorm_probe",
    "apply_generator",
    "jump_multiplier",
    "KolmogorovResidual",
    "kolmogorov_residual",
    "kolmogorov_trapezoid_part",
    "silverman_bandwidth",
    "DensityEstimate",
    "density_estimate",
]


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo settings; ``m`` is the Euler step count per run."""

    n_paths: int = 10_000
    m: int = 256
    seed: int = 0
    threads: int = 1
    chunk: int = 1 << 15
    stderr_ceiling: float | None = None
    backend: str | None = None


@dataclass(frozen=True)
class QuadConfig:
    """Jump-integral quadrature: near part on (0, R], exact spectral far part beyond R.

    ``panel_factor`` scales the Gauss-Legendre panel width pi / (xi_max |v|).
    """

    R: float = 1.0
    order: int = 16
    panel_factor: float = 1.0
    rtol: float = 1e-9


@dataclass
class SemigroupEstimate:
    x_grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    n_paths: int
    m: int
    seed: int
    n_censored: int = 0
    flagged: bool = False
    meta: dict = field(default_factory=dict)

    def within_contraction(self, phi_sup: float) -> bool:
        return bool(np.max(np.abs(self.values)) <= phi_sup + 3 * np.max(self.stderr, initial=0.0))


def _as_points(x_grid, d):
    x = np.asarray(x_grid, dtype=float)
    if x.ndim == 1:
        x = x[:, None] if d == 1 else x[None, :]
    if x.ndim != 2 or x.shape[1] != d:
        raise DomainError(f"evaluation points must have shape (k, {d})")
    return x


class _Accumulator:
    """Running sums of per-path samples of shape (n, k), combined in chunk order."""

    def __init__(self, k):
        self.sum = np.zeros(k)
        self.sq = np.zeros(k)
        self.count = np.zeros(k)

    def add(self, samples, mask):
        s = np.where(mask, samples, 0.0)
        self.sum += s.sum(axis=0)
        self.sq += (s * s).sum(axis=0)
        self.count += mask.sum(axis=0)

    def result(self):
        n = np.maximum(self.count, 1)
        mean = self.sum / n
        var = np.maximum(self.sq / n - mean * mean, 0.0) * n / np.maximum(n - 1, 1)
        return mean, np.sqrt(var / n)


def _run_chunks(model, spec, s, t, pts, mc: MCConfig, reducer):
    """Simulate ``mc.n_paths`` paths from every point and feed chunks to ``reducer``."""
    censored = 0
    for a in range(0, mc.n_paths, mc.chunk):
        n = min(mc.chunk, mc.n_paths - a)
        batch = simulate(model, spec, s, t, pts, mc.m, n, mc.seed, threads=mc.threads,
                         backend=mc.backend, path0=a, chunk=mc.chunk)
        censored += batch.n_censored
        reducer(batch)
    return censored


def _phi_values(phi, X):
    return np.asarray(phi(X), dtype=float)


def estimate_semigroup(model: CoefficientModel, spec: StableSpec, phi, s: float, t: float,
                       x_grid, mc: MCConfig) -> SemigroupEstimate:
    """Pointwise means and standard errors of phi(X_{s,t}(x)) with common random numbers.

    ``phi`` maps points of shape ``(..., d)`` to values of shape ``(...)``.
    """
    pts = _as_points(x_grid, spec.dim)
    acc = _Accumulator(len(pts))

    def reduce(batch: PathBatch):
        acc.add(_phi_values(phi, batch.values), batch.finite_mask)

    cens = _run_chunks(model, spec, s, t, pts, mc, reduce)
    mean, se = acc.result()
    flagged = mc.stderr_ceiling is not None and bool(np.max(se) > mc.stderr_ceiling)
    return SemigroupEstimate(pts, mean, se, mc.n_paths, mc.m, mc.seed, cens, flagged,
                             {"s": s, "t": t})


@dataclass
class GradientSup:
    value: float
    stderr: float
    argmax: np.ndarray
    gradients: np.ndarray      # (k, d)
    grad_stderr: np.ndarray    # (k, d)
    h: float
    warnings: list = field(default_factory=list)
    n_censored: int = 0
    estimate: SemigroupEstimate | None = None

    def __iter__(self):
        return iter((self.value, self.stderr))


def gradient_sup(model: CoefficientModel, spec: StableSpec, phi, s: float, t: float,
                 x_grid, h: float, mc: MCConfig) -> GradientSup:
    """sup_x |grad P_{s,t} phi(x)| from central differences of step h on common noise.

    Each difference is averaged path by path, so its standard error reflects
    the (small) variance of phi(X(x + h e_i)) - phi(X(x - h e_i)). The
    estimate of P_{s,t} phi at the stencil points is returned as well.
    """
    if not h > 0:
        raise DomainError("difference step must be positive")
    pts = _as_points(x_grid, spec.dim)
    d = spec.dim
    k = len(pts)
    warnings = []
    if h > 0.1 * (t - s) ** (1.0 / spec.alpha):
        warnings.append(f"step h={h:.3g} exceeds 0.1 (t-s)^(1/alpha)={0.1 * (t - s) ** (1 / spec.alpha):.3g}")
    shifts = np.eye(d) * h
    plus = (pts[:, None, :] + shifts[None]).reshape(-1, d)
    minus = (pts[:, None, :] - shifts[None]).reshape(-1, d)
    # merge coincident points so shared nodes are simulated once
    both = np.concatenate([plus, minus])
    keys = np.round((both - both.min(axis=0)) / (h * 1e-6)).astype(np.int64)
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    allp = both[first]
    inv = inv.ravel()
    ip, im = inv[: k * d], inv[k * d:]
    acc = _Accumulator(k * d)
    vacc = _Accumulator(len(allp))

    def reduce(batch: PathBatch):
        v = _phi_values(phi, batch.values)
        diff = (v[:, ip] - v[:, im]) / (2 * h)
        ok = batch.finite_mask
        acc.add(diff, ok[:, ip] & ok[:, im])
        vacc.add(v, ok)

    cens = _run_chunks(model, spec, s, t, allp, mc, reduce)
    mean, se = acc.result()
    vmean, vse = vacc.result()
    est = SemigroupEstimate(allp, vmean, vse, mc.n_paths, mc.m, mc.seed, cens, False,
                            {"s": s, "t": t})
    g = mean.reshape(k, d)
    gse = se.reshape(k, d)
    norms = np.linalg.norm(g, axis=1)
    i = int(np.argmax(norms))
    # stderr of |g| at the maximiser (delta method)
    if norms[i] > 0:
        err = float(np.sqrt(np.sum((g[i] / norms[i]) ** 2 * gse[i] ** 2)))
    else:
        err = float(np.linalg.norm(gse[i]))
    return GradientSup(float(norms[i]), err, pts[i], g, gse, float(h), warnings, cens, est)


def holder_seminorm_probe(estimate: SemigroupEstimate, gamma: float) -> float:
    """Hölder seminorm of the estimated function along its (uniform, collinear) x-grid.

    Difference quotients use dyadic multiples of the grid spacing; the grid is
    not treated as periodic.
    """
    pts = estimate.x_grid
    if len(pts) < 2:
        raise DomainError("need at least two evaluation points")
    steps = np.diff(pts, axis=0)
    h = float(np.linalg.norm(steps[0]))
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-9 * max(h, 1e-300)):
        raise DomainError("Hölder probe needs uniformly spaced collinear points")
    return sampled_holder_seminorm(estimate.values, h, gamma)


# ---------------------------------------------------------------- generator

def _near_nodes(R, width, order, alpha):
    """Nodes/weights for int_0^R D(z) z^(1-alpha) dz with D smooth.

    First panel: Gauss-Jacobi with weight z^(1-alpha); the rest Gauss-Legendre.
    """
    glx, glw = np.polynomial.legendre.leggauss(order)
    gjx, gjw = special.roots_jacobi(order, 0.0, 1.0 - alpha)
    n_pan = max(1, int(math.ceil(R / width)))
    w = R / n_pan
    z = [0.5 * w * (1 + gjx)]
    wt = [(0.5 * w) ** (2 - alpha) * gjw]
    for p in range(1, n_pan):
        zz = p * w + 0.5 * w * (1 + glx)
        z.append(zz)
        wt.append(0.5 * w * glw * zz ** (1 - alpha))
    return np.concatenate(z), np.concatenate(wt)


def _far_factor(w, R, alpha):
    """int_R^inf (2 cos(w z) - 2) z^(-1-alpha) dz, vectorised over w."""
    w = np.abs(np.asarray(w, dtype=float))
    out = np.zeros_like(w)
    nz = w > 0
    out[nz] = 2.0 * w[nz] ** alpha * cos_tail(R * w[nz], alpha) - 2.0 * R ** (-alpha) / alpha
    return out


def jump_multiplier(w, alpha: float, R: float, order: int, width: float):
    """int_0^inf (2 cos(w z) - 2) z^(-1-alpha) dz by quadrature, vectorised over w.

    On (0, R] the integrand is written as D(z) z^(1-alpha) with
    D(z) = -4 sin^2(w z / 2) / z^2, which is smooth and free of cancellation;
    (R, inf) uses the cosine tail integral.
    """
    w = np.asarray(w, dtype=float)
    z, wz = _near_nodes(R, width, order, alpha)
    flat = w.ravel()
    near = np.zeros_like(flat)
    for a in range(0, flat.size, 4096):
        ww = flat[a:a + 4096, None]
        near[a:a + 4096] = (-4.0 * np.sin(0.5 * ww * z) ** 2 / (z * z)) @ wz
    return near.reshape(w.shape) + _far_factor(w, R, alpha)


class _Modes:
    """Fourier modes of a grid function (Nyquist dropped), for exact off-grid sums."""

    def __init__(self, u: GridFunction):
        N, d = u.N, u.dim
        F = np.fft.fftn(u.values) / u.values.size
        k = np.fft.fftfreq(N, d=1.0 / N)
        ok = np.abs(k) < N / 2
        keep = np.prod(np.meshgrid(*([ok] * d), indexing="ij"), axis=0).astype(bool)
        xi = k * math.pi / u.L
        modes = np.stack(np.meshgrid(*([xi] * d), indexing="ij"), axis=-1)
        self.F = F[keep]
        self.xi = modes[keep]                                  # (n_modes, d)
        self.L = u.L


def _generator_jumps(model, u, s, R, order, panel_factor, alpha):
    """Jump part of the generator at the grid nodes of u.

    With v = sigma(s, x) e_i, the second difference of the band-limited
    interpolant along v is sum_k u_k e^{i xi_k x} (2 cos(xi_k . v z) - 2),
    so the z-integral acts as the multiplier jump_multiplier(xi_k . v).
    """
    d = u.dim
    pts = u.points().reshape(-1, d)
    sig = model.sigma_at(s, pts)                               # (n, d, d)
    xi_max = math.pi * u.N / (2 * u.L) * math.sqrt(d)
    total = np.zeros(len(pts))
    if model.constant_sigma is not None:
        S = np.asarray(model.constant_sigma, dtype=float)
        axes = rfft_xi_axes(u.N, u.L, d)
        F = np.fft.rfftn(u.values)
        mult = 0.0
        for i in range(d):
            v = S[:, i]
            width = panel_factor * math.pi / (xi_max * float(np.linalg.norm(v)))
            w = sum(axes[k] * v[k] for k in range(d))
            mult = mult + jump_multiplier(np.broadcast_to(w, F.shape), alpha, R, order, width)
        return _irfft(F * mult, u.values.shape)
    modes = _Modes(u)
    for i in range(d):
        v = sig[:, :, i]
        vmax = float(np.max(np.linalg.norm(v, axis=1)))
        if vmax == 0:
            continue
        width = panel_factor * math.pi / (xi_max * vmax)
        for a in range(0, len(pts), 256):
            p = pts[a:a + 256]
            w = v[a:a + 256] @ modes.xi.T                      # (b, n_modes)
            ph = np.exp(1j * (p + modes.L) @ modes.xi.T)       # nodes start at -L
            total[a:a + 256] += np.real((ph * jump_multiplier(w, alpha, R, order, width)) @ modes.F)
    return total.reshape(u.values.shape)


def apply_generator(model: CoefficientModel, u: GridFunction, s: float, alpha: float,
                    quad: QuadConfig = QuadConfig()) -> GridFunction:
    """L_s u = sum_i p.v. int (u(x + sigma^i z) - u(x)) |z|^(-1-alpha) dz + b . grad u.

    Each column v = sigma^i(s, x) contributes the symmetrised integral
    int_0^inf (u(x+vz) + u(x-vz) - 2u(x)) z^(-1-alpha) dz, evaluated on the
    band-limited interpolant of u: Gauss-Jacobi/Gauss-Legendre panels on
    (0, R], the exact cosine tail on (R, inf). The quadrature is repeated with
    doubled order; a change beyond ``quad.rtol`` raises QuadratureError.
    """
    spec = StableSpec(alpha, u.dim)
    if model.dim != u.dim:
        raise DomainError("model and grid dimensions differ")
    if not quad.R > 0:
        raise DomainError("near/far split radius must be positive")
    coarse = _generator_jumps(model, u, s, quad.R, quad.order, quad.panel_factor, spec.alpha)
    fine = _generator_jumps(model, u, s, quad.R, 2 * quad.order, quad.panel_factor, spec.alpha)
    scale = max(float(np.max(np.abs(fine))), float(np.max(np.abs(u.values))), 1e-300)
    diff = float(np.max(np.abs(fine - coarse)))
    if diff > quad.rtol * scale:
        raise QuadratureError("jump integral did not converge under refinement",
                              {"max_change": diff, "scale": scale, "order": quad.order,
                               "R": quad.R})
    out = fine
    if not model.zero_drift:
        b = model.b_at(s, u.points())
        grad = u.gradient()
        out = out + np.sum(np.moveaxis(b, -1, 0) * grad, axis=0)
    return u.with_values(out)


# ---------------------------------------------------------------- Kolmogorov

def _quadrature_residual(model, alpha, P, s_nodes, L, quad, probe):
    """P[0] - P[-1] - trapezoid of L_s P over the s-nodes, at the probe indices."""
    LP = [apply_generator(model, GridFunction(P[k], L), s_nodes[k], alpha, quad).values
          for k in range(len(s_nodes))]
    integral = trapezoid(np.array(LP), s_nodes, axis=0)
    return (P[0] - P[-1] - integral).reshape(-1)[probe]


def kolmogorov_trapezoid_part(model: CoefficientModel, spec: StableSpec, exact, t0: float,
                              t1: float, t: float, quad: QuadConfig = QuadConfig(), *,
                              n_s: int = 8, grid=(32, math.pi), probe=None):
    """Residual of the exact semigroup ``exact(s, x)`` and the trapezoid error bound.

    The bound is (t1 - t0) ds^2 / 12 * max |d^2/ds^2 L_s P_{s,t}phi|, the second
    derivative taken from a second difference on a grid four times finer.
    Returns ``(residual, bound)``.
    """
    if not t0 < t1 < t:
        raise DomainError("need t0 < t1 < t")
    N, L = grid
    gpts = grid_points(N, L, spec.dim)
    if probe is None:
        probe = np.arange(gpts.size // spec.dim)
    s_nodes = np.linspace(t0, t1, n_s + 1)
    ds = (t1 - t0) / n_s
    Pex = [exact(sk, gpts) for sk in s_nodes]
    det = float(np.max(np.abs(_quadrature_residual(model, spec.alpha, Pex, s_nodes, L, quad,
                                                    probe))))
    fine = np.linspace(t0, t1, 4 * n_s + 1)
    LP = np.array([apply_generator(model, GridFunction(exact(sk, gpts), L), sk, spec.alpha,
                                   quad).values.reshape(-1)[probe] for sk in fine])
    h = fine[1] - fine[0]
    f2 = np.max(np.abs(LP[2:] - 2 * LP[1:-1] + LP[:-2])) / h ** 2
    return det, float((t1 - t0) * ds ** 2 / 12.0 * f2)


@dataclass
class KolmogorovResidual:
    residual: float            # sup over probe points of |MC residual|
    noise_floor: float         # batch-means standard error of that residual
    deterministic: float       # same residual with the exact semigroup (quadrature part)
    trapezoid_bound: float
    ds: float
    within: bool
    per_point: np.ndarray = field(default_factory=lambda: np.zeros(0))


def kolmogorov_residual(model: CoefficientModel, spec: StableSpec, phi, t0: float, t1: float,
                        t: float, mc: MCConfig, quad: QuadConfig = QuadConfig(), *,
                        n_s: int = 8, grid=(32, math.pi), probe=None, batches: int = 10,
                        exact=None) -> KolmogorovResidual:
    """sup_x |P_{t0,t}phi - P_{t1,t}phi - int_{t0}^{t1} L_s P_{s,t}phi ds| on probe points.

    P_{s,t}phi is estimated by Monte Carlo on the periodic grid ``grid = (N, L)``
    at ``n_s + 1`` equally spaced s-nodes, L_s by :func:`apply_generator`, and the
    s-integral by the trapezoid rule. The noise floor is the standard error
    across ``batches`` path batches. ``exact(s, x)`` (the closed-form semigroup,
    optional) gives the deterministic residual and the trapezoid bound.
    """
    if not t0 < t1 < t:
        raise DomainError("need t0 < t1 < t")
    N, L = grid
    d = spec.dim
    gpts = grid_points(N, L, d)
    flat = gpts.reshape(-1, d)
    s_nodes = np.linspace(t0, t1, n_s + 1)
    ds = (t1 - t0) / n_s
    if probe is None:
        probe = np.arange(flat.shape[0])
    per_batch = max(1, mc.n_paths // batches)

    def residual_of(P):
        return _quadrature_residual(model, spec.alpha, P, s_nodes, L, quad, probe)

    # every s-node reuses the same noise stream; batches are disjoint path ranges
    batch_res = []
    for b in range(batches):
        P = []
        for sk in s_nodes:
            acc = _Accumulator(flat.shape[0])
            for a in range(0, per_batch, mc.chunk):
                n = min(mc.chunk, per_batch - a)
                batch = simulate(model, spec, sk, t, flat, mc.m, n, mc.seed,
                                 threads=mc.threads, backend=mc.backend,
                                 path0=b * per_batch + a, chunk=mc.chunk)
                acc.add(_phi_values(phi, batch.values), batch.finite_mask)
            mean, _ = acc.result()
            P.append(mean.reshape(gpts.shape[:-1]))
        batch_res.append(residual_of(P))
    batch_res = np.array(batch_res)
    res = batch_res.mean(axis=0)
    noise = batch_res.std(axis=0, ddof=1) / math.sqrt(batches)
    i = int(np.argmax(np.abs(res)))
    det = math.nan
    bound = math.nan
    if exact is not None:
        det, bound = kolmogorov_trapezoid_part(model, spec, exact, t0, t1, t, quad, n_s=n_s,
                                               grid=grid, probe=probe)
    within = bool(abs(res[i]) <= 3.0 * (noise[i] + (0.0 if math.isnan(bound) else bound)))
    return KolmogorovResidual(float(abs(res[i])), float(noise[i]), det, bound, ds, within,
                              res)


# ---------------------------------------------------------------- densities

def silverman_bandwidth(samples) -> float:
    """0.9 * (IQR / 1.34) * n^(-1/5), robust to heavy tails (per coordinate, averaged)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise DomainError("need at least two samples")
    q75, q25 = np.percentile(x, [75, 25], axis=0)
    spread = float(np.mean((q75 - q25) / 1.34))
    if spread <= 0:
        raise DomainError("degenerate sample (zero interquartile range)")
    return 0.9 * spread * n ** (-0.2)


@dataclass
class DensityEstimate:
    density: GridFunction
    bandwidth: float
    in_box_mass: float
    out_of_box_mass: float
    n_samples: int

    @property
    def total_mass(self) -> float:
        return self.in_box_mass + self.out_of_box_mass


def density_estimate(batch, bandwidth: float, grid, *, point: int = 0) -> DensityEstimate:
    """Gaussian product-kernel density estimate of the terminal values on ``grid = (N, L)``.

    ``batch`` is a PathBatch (column ``point`` of its starting points is used)
    or an array of samples ``(n, d)``. Samples are linearly binned on a grid
    extended by 8 bandwidths, convolved by FFT and cropped; the kernel mass
    leaving the box is computed exactly per sample.
    """
    if not bandwidth > 0:
        raise DomainError("bandwidth must be positive")
    if isinstance(batch, PathBatch):
        X = batch.values[:, point, :][batch.finite_mask[:, point]]
    else:
        X = np.asarray(batch, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
    N, L = grid
    n, d = X.shape
    if n == 0:
        raise DomainError("no samples")
    dx = 2.0 * L / N
    ext = int(math.ceil(8 * bandwidth / dx))
    M = N + 2 * ext
    # pad to a length that also avoids wrap-around in the convolution
    K = 1
    while K < M + 2 * ext:
        K *= 2
    lo = -L - ext * dx
    pos = (X - lo) / dx
    inside = np.all((pos >= 0) & (pos < M - 1), axis=1)
    p = pos[inside]
    base = np.floor(p).astype(np.int64)
    frac = p - base
    hist = np.zeros((M,) * d)
    for corner in range(1 << d):
        idx = []
        w = np.ones(len(p))
        for ax in range(d):
            bit = (corner >> ax) & 1
            idx.append(base[:, ax] + bit)
            w = w * (frac[:, ax] if bit else 1.0 - frac[:, ax])
        np.add.at(hist, tuple(idx), w)
    hist /= n
    # Gaussian kernel on the padded grid, centred at index 0, unit discrete mass
    k = np.fft.fftfreq(K, d=1.0 / K) * dx
    g1 = np.exp(-0.5 * (k / bandwidth) ** 2)
    g1 = g1 / (g1.sum() * dx)
    G = 1.0
    for ax in range(d):
        shape = [1] * d
        shape[ax] = -1
        g_hat = np.fft.rfft(g1) if ax == d - 1 else np.fft.fft(g1)
        G = G * g_hat.reshape(shape)
    padded = np.zeros((K,) * d)
    padded[(slice(0, M),) * d] = hist
    conv = _irfft(np.fft.rfftn(padded) * G, (K,) * d)
    vals = np.maximum(conv[(slice(ext, ext + N),) * d], 0.0)
    dens = GridFunction(vals, L)
    in_box = float(vals.sum() * dx ** d)
    # exact kernel mass outside [-L, L)^d for every sample
    z_hi = (L - X) / (math.sqrt(2) * bandwidth)
    z_lo = (-L - X) / (math.sqrt(2) * bandwidth)
    inside_mass = np.prod(0.5 * (special.erf(z_hi) - special.erf(z_lo)), axis=1)
    out = float(np.mean(1.0 - inside_mass))
    return DensityEstimate(dens, float(bandwidth), in_box, out, int(n))
