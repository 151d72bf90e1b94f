"""Parametrised checks shared by the single-experiment commands and the acceptance run.

Each check returns a :class:`CheckResult` holding its metric rows, fits and
verdicts. Verdicts carry the number of the acceptance criterion they decide.
"""

from __future__ import annotations

import math

import numpy as np

from ..fitting import fit_exponent
from ..heat import (block_decay_fit, block_kernel_decay, duhamel_solve, frozen_symbol, kernel,
                    moment_integral, symbol_lower_bound, weak_residual)
from ..models import constant, default_probe_grid, from_preset, identity, validate_assumptions
from ..noise import StableSpec
from ..sde import simulate
from ..semigroup import (MCConfig, QuadConfig, density_estimate, estimate_semigroup,
                         gradient_sup, holder_seminorm_probe, kolmogorov_residual,
                         kolmogorov_trapezoid_part, silverman_bandwidth)
from ..spectral import (DyadicDecomposition, GridFunction, _irfft, besov_norm, block,
                        bump_profile, commutator_decay, holder_norm, mollify, rfft_xi_norm,
                        young_constants)
from .report import CheckResult

__all__ = [
    "check_cauchy",
    "check_scaling",
    "check_moments",
    "check_symbol_bound",
    "check_block_decay",
    "check_littlewood_paley",
    "check_commutator",
    "check_duhamel",
    "check_semigroup_oracle",
    "check_envelopes",
    "check_rough_data",
    "check_kolmogorov",
    "check_density",
    "check_simulate",
    "heaviside",
    "block_decay_time",
]


def _sym(sigma, alpha):
    return frozen_symbol(np.atleast_2d(np.asarray(sigma, dtype=float)), alpha)


# ---------------------------------------------------------------- heat kernel

def check_cauchy(N=4096, L=64.0, tol=1e-6, tau=1.0) -> CheckResult:
    """Spectral kernel at alpha=1 against the Cauchy density of scale pi * tau."""
    res = CheckResult("kernel", "identity")
    k = kernel(_sym(1.0, 1.0), 0.0, tau, N, L)
    x = k.density.axis()
    g = math.pi * tau
    err = float(np.max(np.abs(k.density.values - g / (math.pi * (x * x + g * g)))))
    res.metric(1.0, "cauchy_max_abs_error", err, t=tau)
    res.metric(1.0, "kernel_mass", k.mass(), t=tau)
    res.verdict(1, "cauchy-closed-form", err <= tol, err, tol, "<=", alpha=1.0, N=N, L=L,
                tau=tau, max_abs_error=err)
    return res


def check_scaling(alphas=(0.7, 1.0, 1.5), ts=(0.25, 1.0, 4.0), N=4096, L=32.0, tol=1e-8,
                  sigma=1.0, preset="identity") -> CheckResult:
    """p_{0,t}(x) = t^(-d/alpha) p_{0,1}(t^(-1/alpha) x), node by node.

    p_{0,1} is computed on the box scaled by t^(-1/alpha) with the same N, so
    the nodes correspond exactly.
    """
    res = CheckResult("kernel", preset)
    worst = 0.0
    raw = {}
    for a in alphas:
        sym = _sym(sigma, a)
        d = sym.dim
        for t in ts:
            c = t ** (-1.0 / a)
            pt = kernel(sym, 0.0, t, N, L).density.values
            p1 = kernel(sym, 0.0, 1.0, N, L * c).density.values
            ref = c ** d * p1
            err = float(np.max(np.abs(pt - ref) / np.abs(ref)))
            res.metric(a, "scaling_rel_error", err, t=t)
            raw[f"alpha={a:g},t={t:g}"] = err
            worst = max(worst, err)
    res.verdict(2, "scaling-identity", worst <= tol, worst, tol, "<=", **raw)
    return res


def check_moments(alphas=(0.7, 1.5), ladder=tuple(2.0 ** -k for k in range(6, 0, -1)),
                  N=65536, L=64.0, tol=0.05, sigma=1.0, preset="identity") -> CheckResult:
    """t-slopes of int |x|^beta |grad^n p_{0,t}| against (beta - n) / alpha."""
    res = CheckResult("kernel", preset)
    for a in alphas:
        sym = _sym(sigma, a)
        cases = ((0, a / 2), (1, 0.0), (2, 0.0))
        vals = {c: [] for c in cases}
        for t in ladder:
            k = kernel(sym, 0.0, t, N, L)
            for n, b in cases:
                m = moment_integral(k, n, b)
                vals[(n, b)].append(float(m))
                res.metric(a, f"moment[n={n},beta={b:g}]", float(m), t=t, index=n)
        for n, b in cases:
            f = fit_exponent(x=ladder, y=vals[(n, b)])
            name = f"moment-slope[n={n},beta={b:g}]"
            res.fit(a, name, f)
            target = (b - n) / a
            dev = abs(f.slope - target)
            res.verdict(3, name, dev <= tol, dev, tol, "<=", alpha=a, slope=f.slope,
                        expected=target)
    return res


def check_symbol_bound(alphas=(0.7, 1.0, 1.5), n_draws=20, seed=0, c0=2.0) -> CheckResult:
    """c2 = min -psi / min(|xi|^2, |xi|^alpha) > 0 for random admissible constant sigma."""
    res = CheckResult("kernel", "random-constant")
    rng = np.random.default_rng(seed)
    for a in alphas:
        c2s = []
        for i in range(n_draws):
            d = 2 + i % 2
            U, _ = np.linalg.qr(rng.standard_normal((d, d)))
            V, _ = np.linalg.qr(rng.standard_normal((d, d)))
            s = np.exp(rng.uniform(-math.log(c0), math.log(c0), d))
            sigma = U @ np.diag(s) @ V
            rep = validate_assumptions(constant(sigma), default_probe_grid(d, n=3))
            if not rep.passed:
                res.observation(a, "rejected_draw", float(i), index=i)
                continue
            c2, _ = symbol_lower_bound(_sym(sigma, a), n_dirs=360)
            c2s.append(c2)
            res.metric(a, "c2", c2, index=i)
        lo = min(c2s) if c2s else -math.inf
        res.verdict(4, "symbol-lower-bound", lo > 0 and len(c2s) == n_draws, lo, 0.0, ">",
                    alpha=a, min_c2=lo, accepted=len(c2s), draws=n_draws)
    return res


def block_decay_time(alpha, j_hi):
    """Time at which t 2^(alpha (j_hi + 1)) <= 1/16, the small-t regime of the block fits."""
    return 2.0 ** -(math.ceil(alpha * (j_hi + 1)) + 4)


def check_block_decay(alphas=(0.7, 1.0, 1.5), js=tuple(range(2, 8)), N=4096, L=16.0,
                      ladder=tuple(2.0 ** -k for k in range(6, -1, -1)), tol=0.15,
                      sigma=1.0, preset="identity") -> CheckResult:
    """j-slopes of ||grad^n R_j p||_1 against n, and the j=0 norm over a t-ladder."""
    res = CheckResult("kernel", preset)
    dec = DyadicDecomposition(N, L, 1)
    young0 = float(young_constants(dec)[0])
    for a in alphas:
        sym = _sym(sigma, a)
        t = block_decay_time(a, max(js))
        for n in (0, 1):
            f = block_decay_fit(sym, t, n, 0.0, js, dec)
            for j, y in zip(js, f.y):
                res.metric(a, f"block_norm[n={n}]", y, t=t, index=j)
            name = f"block-slope[n={n}]"
            res.fit(a, name, f)
            dev = abs(f.slope - n)
            res.verdict(5, name, dev <= tol, dev, tol, "<=", alpha=a, slope=f.slope,
                        expected=n, t=t)
        vals = []
        for tt in ladder:
            v = block_kernel_decay(sym, 0.0, tt, 0, 0, 0.0, dec)
            vals.append(v)
            res.metric(a, "block0_norm", v, t=tt, index=0)
        top = max(vals)
        res.verdict(5, "block0-bounded", top <= young0, top, young0, "<=", alpha=a,
                    values=vals)
    return res


def check_duhamel(alpha=1.5, N=64, steps=(8, 16, 32, 64, 128), tol=1.8) -> CheckResult:
    """Order in dt of the weak residual for one Fourier mode with a single-mode forcing."""
    res = CheckResult("kernel", "identity")
    L = math.pi
    sym = _sym(1.0, alpha)
    phi = GridFunction.from_callable(lambda p: np.cos(p[..., 0]), N, L)
    w = GridFunction.from_callable(lambda p: np.cos(p[..., 0]) + np.cos(2 * p[..., 0]), N, L)
    g = GridFunction.from_callable(lambda p: np.cos(2 * p[..., 0]), N, L)

    def f(s):
        return g * math.sin(3 * s)

    dts, rs = [], []
    for n in steps:
        tg = np.linspace(0.0, 1.0, n + 1)
        u = duhamel_solve(sym, phi, f, tg)
        r = abs(weak_residual(sym, phi, f, tg, u, w))
        dts.append(1.0 / n)
        rs.append(r)
        res.metric(alpha, "weak_residual", r, t=1.0 / n, index=n)
    fit = fit_exponent(x=dts, y=rs)
    res.fit(alpha, "duhamel-order", fit)
    res.verdict(8, "duhamel-order", fit.slope >= tol, fit.slope, tol, ">=", alpha=alpha,
                residuals=rs)
    return res


# ---------------------------------------------------------------- spectral

def _abs_sine(s):
    return lambda p: np.abs(np.sin(p[..., 0])) ** s


def _lacunary(s, N):
    K = int(math.log2(N)) - 2
    return lambda p: sum(2.0 ** (-s * k) * np.cos(2 ** k * p[..., 0]) for k in range(K))


def _band_limited(rng, N, L, d, cutoff):
    """Random real grid function with no Fourier content above ``cutoff``."""
    F = np.fft.rfftn(rng.standard_normal((N,) * d))
    F[rfft_xi_norm(N, L, d) > cutoff] = 0.0
    return GridFunction(_irfft(F, (N,) * d), L)


def check_littlewood_paley(seed=0, n_random=50, part_tol=1e-12, tr1_tol=1e-12, band=2.0,
                           sizes=(1024, 2048, 4096, 8192), smooth=(0.3, 0.5, 0.7)) -> CheckResult:
    res = CheckResult("besov", "synthetic")
    rng = np.random.default_rng(seed)
    L = math.pi
    # telescoping: sum_{j<=k} phi_j = phi_0(2^-k .), and the blocks of a function
    # band-limited to |xi| <= 2^j_max add up to it
    worst = 0.0
    for N, d in ((1024, 1), (64, 2)):
        dec = DyadicDecomposition(N, L, d)
        r = rfft_xi_norm(N, L, d)
        err = max(float(np.max(np.abs(dec.partial_sum(k) - bump_profile(r * 2.0 ** -k))))
                  for k in range(dec.j_max + 1))
        f = _band_limited(rng, N, L, d, 2.0 ** dec.j_max)
        total = sum(block(j, f, dec).values for j in range(dec.j_max + 1))
        err = max(err, float(np.max(np.abs(total - f.values)) / np.max(np.abs(f.values))))
        worst = max(worst, err)
        res.metric("all", f"partition_error[d={d}]", err, index=N)
    res.verdict(6, "telescoping-partition", worst <= part_tol, worst, part_tol, "<=")
    # R_j = R_j (R_{j-1} + R_j + R_{j+1}) on random grid functions
    worst = 0.0
    for i in range(n_random):
        N, d = ((256, 1), (32, 2))[i % 2]
        dec = DyadicDecomposition(N, L, d)
        r = rfft_xi_norm(N, L, d)
        f = GridFunction(rng.standard_normal((N,) * d), L)
        F = f.fft()
        scale = float(np.max(np.abs(f.values)))
        e = 0.0
        for j in range(dec.j_max + 1):
            phi_j = dec.ring(j, r)
            near = dec.ring(j - 1, r) + phi_j + dec.ring(j + 1, r)
            diff = _irfft(F * phi_j * near, f.values.shape) - _irfft(F * phi_j, f.values.shape)
            e = max(e, float(np.max(np.abs(diff))) / scale)
        res.metric("all", "tr1_error", e, index=i)
        worst = max(worst, e)
    res.verdict(6, "tr1-identity", worst <= tr1_tol, worst, tr1_tol, "<=", draws=n_random)
    # Besov / Hölder ratio under grid refinement
    worst = 1.0
    raw = {}
    for s in smooth:
        for fam in ("abs-sine", "lacunary"):
            ratios = []
            for N in sizes:
                func = _abs_sine(s) if fam == "abs-sine" else _lacunary(s, N)
                f = GridFunction.from_callable(func, N, L)
                r = float(besov_norm(f, s)) / holder_norm(f, s)
                ratios.append(r)
                res.metric("all", f"besov_holder_ratio[{fam},s={s:g}]", r, index=N)
            change = max(max(a / b, b / a) for a, b in zip(ratios, ratios[1:]))
            raw[f"{fam},s={s:g}"] = ratios
            worst = max(worst, change)
    res.verdict(6, "lj1-ratio-stability", worst <= band, worst, band, "<=", **raw)
    return res


def check_commutator(seed=0, N=8192, beta=0.6, margin=0.1) -> CheckResult:
    """log2-slope in j of ||R_j(fg) - f R_j g||_inf for f of Hölder order beta."""
    res = CheckResult("besov", "synthetic")
    L = math.pi
    rng = np.random.default_rng(seed)
    dec = DyadicDecomposition(N, L, 1)
    x = GridFunction.from_callable(lambda p: p[..., 0], N, L).values
    K = int(math.log2(N // 2))
    phases = rng.uniform(0.0, 2 * math.pi, K)
    f = GridFunction(sum(2.0 ** (-beta * k) * np.cos(2 ** k * x + phases[k]) for k in range(K)), L)
    g = GridFunction(np.abs(np.sin(x)) ** 0.3, L)
    js = list(range(3, dec.j_max - 1))
    vals = [commutator_decay(f, g, j, math.inf, dec) for j in js]
    for j, v in zip(js, vals):
        res.metric(beta, "commutator_norm", v, index=j)
    fit = fit_exponent(x=[2.0 ** j for j in js], y=vals)
    res.fit(beta, "commutator-slope", fit)
    thr = -beta + margin
    res.verdict(7, "commutator-slope", fit.slope <= thr, fit.slope, thr, "<=", alpha="all",
                beta=beta, js=js)
    return res


# ---------------------------------------------------------------- Monte Carlo

def check_semigroup_oracle(alphas=(0.7, 1.0, 1.5), n_paths=100_000, m=16, seed=0, threads=1,
                           t=1.0, n_points=9, tol=3.0) -> CheckResult:
    """MC estimate of E cos(X_t(x)) against exp(t psi(1)) cos(x) for sigma = 1, b = 0."""
    res = CheckResult("semigroup-scaling", "identity")
    xs = np.linspace(-math.pi, math.pi, n_points)
    for a in alphas:
        spec = StableSpec(a, 1)
        est = estimate_semigroup(identity(1), spec, lambda X: np.cos(X[..., 0]), 0.0, t, xs,
                                 MCConfig(n_paths=n_paths, m=m, seed=seed, threads=threads))
        exact = math.exp(t * float(_sym(1.0, a)(1.0))) * np.cos(xs)
        z = np.abs(est.values - exact) / est.stderr
        for i, x in enumerate(xs):
            res.metric(a, "oracle_estimate", est.values[i], t=t, index=i, stderr=est.stderr[i])
        worst = float(np.max(z))
        res.verdict(9, "semigroup-oracle", worst <= tol, worst, tol, "<=", alpha=a,
                    max_abs_error=float(np.max(np.abs(est.values - exact))),
                    max_stderr=float(np.max(est.stderr)), n_paths=n_paths,
                    contraction=est.within_contraction(1.0))
    return res


def heaviside(X):
    """Indicator of x_1 < 1/2: bounded data with a jump, the roughest admissible phi."""
    return (X[..., 0] < 0.5).astype(float)


def check_envelopes(preset="diag-sine", params=None, alpha=1.0, ladder=None, n_paths=1_000_000,
                    seed=0, threads=1, gammas=None, slope_tol=0.15, rms_tol=0.1,
                    criteria=(10, 11), half_width=10) -> CheckResult:
    """Gradient and Hölder seminorms of P_{0,t}phi along a dyadic t-ladder, with slope fits.

    phi is the Heaviside function; the gradient is estimated on 2 half_width + 1
    points spaced 2h around the transported jump, h = 0.1 t^(1/alpha), and the
    same runs give P_{0,t}phi on the points spaced h used for the Hölder
    seminorms.
    """
    params = dict(params or {})
    ladder = tuple(ladder or (2.0 ** -k for k in range(6, 0, -1)))
    gammas = tuple(gammas if gammas is not None else (0.5, alpha - 0.1))
    model = from_preset(preset, 1, **params)
    spec = StableSpec(alpha, 1)
    res = CheckResult("semigroup-scaling", preset)
    grads, holders = [], {g: [] for g in gammas}
    for t in ladder:
        h = 0.1 * t ** (1.0 / alpha)
        c = 0.5 - float(model.b_at(0.0, np.array([0.5]))[0]) * t
        xs = c + 2 * h * np.arange(-half_width, half_width + 1)
        m = max(8, math.ceil(128 * t))
        mc = MCConfig(n_paths=n_paths, m=m, seed=seed, threads=threads)
        gs = gradient_sup(model, spec, heaviside, 0.0, t, xs, h, mc)
        grads.append(gs.value)
        res.metric(alpha, "gradient_sup", gs.value, t=t, stderr=gs.stderr)
        for g in gammas:
            v = holder_seminorm_probe(gs.estimate, g)
            holders[g].append(v)
            res.metric(alpha, f"holder_seminorm[gamma={g:g}]", v, t=t)
    f = fit_exponent(x=ladder, y=grads)
    res.fit(alpha, "gradient-slope", f)
    env = -1.0 / alpha - slope_tol
    if 10 in criteria:
        res.verdict(10, "gradient-envelope", f.slope >= env, f.slope, env, ">=", alpha=alpha,
                    preset=preset, nominal=-1.0 / alpha, residual_rms=f.residual_rms)
        res.verdict(10, "gradient-fit-rms", f.residual_rms <= rms_tol, f.residual_rms, rms_tol,
                    "<=", alpha=alpha, preset=preset)
    for g in gammas:
        fg = fit_exponent(x=ladder, y=holders[g])
        name = f"holder-slope[gamma={g:g}]"
        res.fit(alpha, name, fg)
        env = -g / alpha - slope_tol
        if 11 in criteria:
            res.verdict(11, f"holder-envelope[gamma={g:g}]", fg.slope >= env, fg.slope, env,
                        ">=", alpha=alpha, preset=preset, nominal=-g / alpha,
                        residual_rms=fg.residual_rms)
            res.verdict(11, f"holder-fit-rms[gamma={g:g}]", fg.residual_rms <= rms_tol,
                        fg.residual_rms, rms_tol, "<=", alpha=alpha, preset=preset)
    return res


def check_rough_data(preset="identity", params=None, alpha=1.5, eta=0.3, t=0.25, n_paths=10_000,
                     seed=0, threads=1, eps_ladder=None, N=4096, n_points=32) -> CheckResult:
    """Negative-order data through a mollified ladder (observational only).

    phi = sum_k 2^(eta k) cos(2^k x + theta_k) has a bounded B^{-eta}_{inf,inf}
    norm but no bounded version; phi_eps = mollify(phi, eps) is bounded, with
    sup norm growing like eps^(-eta). Rows record both norms and
    sup |grad P_{0,t} phi_eps| for each eps, so the growth of the gradient can be
    compared with that of the two norms.
    """
    params = dict(params or {})
    eps_ladder = tuple(eps_ladder or (2.0 ** -k for k in range(3, 8)))
    model = from_preset(preset, 1, **params)
    spec = StableSpec(alpha, 1)
    res = CheckResult("semigroup-scaling", preset)
    L = math.pi
    x = GridFunction(np.zeros(N), L).axis()
    rng = np.random.default_rng(seed)
    K = int(math.log2(N)) - 2
    phases = rng.uniform(0, 2 * math.pi, K)
    phi = GridFunction(sum(2.0 ** (eta * k) * np.cos(2 ** k * x + phases[k - 1])
                           for k in range(1, K + 1)), L)
    xs = np.linspace(-L, L, n_points, endpoint=False)
    h = 0.1 * t ** (1.0 / alpha)
    m = max(8, math.ceil(128 * t))
    mc = MCConfig(n_paths=n_paths, m=m, seed=seed, threads=threads)
    sups = []
    for k, eps in enumerate(eps_ladder):
        f = mollify(phi, eps)
        sup = float(np.abs(f.values).max())
        sups.append(sup)
        res.observation(alpha, f"rough_besov_norm[eta={eta:g}]", float(besov_norm(f, -eta)),
                        t=eps, index=k)
        res.observation(alpha, "rough_sup_norm", sup, t=eps, index=k)

        def phi_eps(X, v=f.values):
            return np.interp(X[..., 0], x, v, period=2 * L)

        gs = gradient_sup(model, spec, phi_eps, 0.0, t, xs, h, mc)
        res.observation(alpha, "rough_gradient_sup", gs.value, t=eps, index=k)
        res.observation(alpha, "rough_gradient_stderr", gs.stderr, t=eps, index=k)
    res.fit(alpha, "rough-sup-growth", fit_exponent(x=eps_ladder, y=sups))
    return res


def check_kolmogorov(alpha=1.5, n_paths=1_000_000, m=16, seed=0, threads=1, grid=(16, math.pi),
                     n_s=8, t0=0.0, t1=0.5, t=1.0, factor=3.0, ratio_tol=0.5,
                     preset="identity", params=None, dim=1) -> CheckResult:
    """Backward equation residual for phi = cos(x_1) and its trapezoid part under ds halving."""
    model = from_preset(preset, dim, **dict(params or {}))
    d = dim
    spec = StableSpec(alpha, d)
    res = CheckResult("kolmogorov", preset)
    quad = QuadConfig()

    def phi(X):
        return np.cos(X[..., 0])

    exact = None
    if model.is_constant and model.zero_drift:
        xi = np.zeros(d)
        xi[0] = 1.0
        psi = float(_sym(model.sigma_at(0.0, np.zeros(d)), alpha)(xi))

        def exact(s, X):
            return math.exp((t - s) * psi) * np.cos(X[..., 0])

    mc = MCConfig(n_paths=n_paths, m=m, seed=seed, threads=threads)
    kr = kolmogorov_residual(model, spec, phi, t0, t1, t, mc, quad, n_s=n_s, grid=grid,
                             exact=exact)
    res.metric(alpha, "residual", kr.residual, index=n_s, stderr=kr.noise_floor)
    res.metric(alpha, "trapezoid_bound", kr.trapezoid_bound, index=n_s)
    res.metric(alpha, "deterministic_residual", kr.deterministic, index=n_s)
    allowed = factor * (kr.noise_floor + (0.0 if math.isnan(kr.trapezoid_bound)
                                          else kr.trapezoid_bound))
    res.verdict(12, "kolmogorov-residual", kr.residual <= allowed, kr.residual, allowed, "<=",
                alpha=alpha, noise_floor=kr.noise_floor, trapezoid_bound=kr.trapezoid_bound,
                n_paths=n_paths, n_s=n_s)
    if exact is not None:
        dets = {}
        for k in (n_s // 2, n_s, 2 * n_s):
            dets[k], _ = kolmogorov_trapezoid_part(model, spec, exact, t0, t1, t, quad, n_s=k,
                                                   grid=grid)
            res.metric(alpha, "deterministic_residual", dets[k], index=k)
        ratios = [dets[n_s // 2] / dets[n_s], dets[n_s] / dets[2 * n_s]]
        dev = max(abs(r - 4.0) for r in ratios)
        res.verdict(12, "trapezoid-contraction", dev <= ratio_tol, dev, ratio_tol, "<=",
                    alpha=alpha, ratios=ratios, deterministic=list(dets.values()))
    return res


def check_density(alpha=1.0, n_paths=1_000_000, m=16, seed=0, threads=1, N=4096, L=64.0,
                  T=1.0, l1_tol=0.02, mass_tol=1e-3, rough=None, etas=None,
                  assert_from=1_000_000, preset="identity", params=None) -> CheckResult:
    """KDE of X_{0,T}(0) with bandwidths {1/2, 1, 2} x Silverman, plus Besov probes.

    For the identity preset the estimate is compared with the exact density
    (Cauchy at alpha=1, the spectral kernel otherwise); the L1 distance is a
    verdict only from ``assert_from`` paths on. ``rough`` is
    ``(preset, params, alpha, n_paths)`` for the observational probe on a
    rough-coefficient model.
    """
    res = CheckResult("density", preset)
    spec = StableSpec(alpha, 1)
    model = from_preset(preset, 1, **dict(params or {}))
    batch = simulate(model, spec, 0.0, T, np.zeros((1, 1)), m, n_paths, seed, threads=threads)
    bw = silverman_bandwidth(batch.values[:, 0, :][batch.finite_mask[:, 0]])
    oracle = None
    if preset == "identity":
        if alpha == 1.0:
            x = GridFunction.from_callable(lambda p: p[..., 0], N, L).values
            g = math.pi * T
            oracle = g / (math.pi * (x * x + g * g))
        else:
            oracle = kernel(_sym(1.0, alpha), 0.0, T, N, L).density.values
    dx = 2.0 * L / N
    mass_err = 0.0
    l1 = {}
    ests = {}
    for factor in (0.5, 1.0, 2.0):
        est = density_estimate(batch, factor * bw, (N, L))
        ests[factor] = est
        if oracle is not None:
            l1[factor] = float(np.sum(np.abs(est.density.values - oracle)) * dx)
            res.metric(alpha, f"kde_l1[bw_factor={factor:g}]", l1[factor], t=T)
        res.metric(alpha, f"kde_in_box_mass[bw_factor={factor:g}]", est.in_box_mass, t=T)
        res.metric(alpha, f"kde_out_of_box_mass[bw_factor={factor:g}]", est.out_of_box_mass, t=T)
        mass_err = max(mass_err, abs(est.total_mass - 1.0))
    res.metric(alpha, "bandwidth", bw, t=T)
    if oracle is not None and n_paths >= assert_from:
        res.verdict(13, "kde-l1", l1[1.0] <= l1_tol, l1[1.0], l1_tol, "<=", alpha=alpha,
                    bandwidth=bw, l1=l1, n_paths=n_paths)
    elif oracle is not None:
        res.observation(alpha, "kde_l1_not_asserted", l1[1.0])
    res.verdict(13, "kde-mass", mass_err <= mass_tol, mass_err, mass_tol, "<=", alpha=alpha,
                totals={f: e.total_mass for f, e in ests.items()})
    _besov_probe(res, ests[1.0].density, ests[0.5].density, alpha,
                 min(alpha + model.beta - 1.0, 1.0),
                 etas or (0.1, 0.3, 0.5, 0.7, 0.9, 1.3, 1.7))
    if rough is not None:
        preset, params, ra, rn = rough
        rmodel = from_preset(preset, 1, **params)
        rspec = StableSpec(ra, 1)
        rb = simulate(rmodel, rspec, 0.0, T, np.zeros((1, 1)), 64, rn, seed, threads=threads)
        rbw = silverman_bandwidth(rb.values[:, 0, :][rb.finite_mask[:, 0]])
        d1 = density_estimate(rb, rbw, (N, L)).density
        d2 = density_estimate(rb, 0.5 * rbw, (N, L)).density
        thr = min(ra + rmodel.beta - 1.0, 1.0)
        sub = CheckResult("density", preset)
        _besov_probe(sub, d1, d2, ra, thr, (0.1, 0.2, 0.3, 0.6, 0.9, 1.3))
        res.rows.extend(sub.rows)
    return res


def _besov_probe(res, f_h, f_half, alpha, threshold, etas):
    """Record ||KDE||_{B^eta_{1,1}} at bandwidth h and h/2 (observational only)."""
    res.observation(alpha, "besov_threshold", threshold)
    for eta in etas:
        a = float(besov_norm(f_h, eta, 1, 1))
        b = float(besov_norm(f_half, eta, 1, 1))
        res.observation(alpha, f"besov_11[eta={eta:g},bw_factor=1]", a)
        res.observation(alpha, f"besov_11[eta={eta:g},bw_factor=0.5]", b)
        res.observation(alpha, f"besov_11_ratio[eta={eta:g}]", b / a)


def check_simulate(preset="identity", params=None, alpha=1.0, dim=1, n_paths=0, m=256, seed=0,
                   threads=1, T=1.0) -> CheckResult:
    """Terminal-value quantiles from the origin; no verdicts."""
    model = from_preset(preset, dim, **dict(params or {}))
    spec = StableSpec(alpha, dim)
    res = CheckResult("simulate", preset)
    batch = simulate(model, spec, 0.0, T, np.zeros((1, dim)), m, n_paths, seed, threads=threads)
    res.metric(alpha, "n_paths", float(batch.n_paths), t=T)
    res.metric(alpha, "censoring_rate", batch.censoring_rate, t=T)
    if batch.n_paths:
        ok = batch.finite_mask[:, 0]
        X = batch.values[ok, 0, :]
        for i in range(dim):
            for q in (0.05, 0.25, 0.5, 0.75, 0.95):
                res.metric(alpha, f"quantile[coord={i},q={q:g}]", float(np.quantile(X[:, i], q)),
                           t=T, index=i)
    return res
