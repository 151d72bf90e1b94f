"""Single-experiment runs: gate the configuration, pick checks, collect a Report."""

from __future__ import annotations

import math
import time

import numpy as np

from ..errors import ConfigError, GateError
from ..spectral import DyadicDecomposition
from . import checks as C
from .config import ExperimentConfig, check_gate
from .report import Report

__all__ = ["run", "plan", "KIND_CHECKS", "DEFAULT_GRIDS"]

# checks each experiment kind knows, in run order
KIND_CHECKS = {
    "simulate": ("quantiles",),
    "kernel": ("cauchy", "scaling", "moments", "symbol-bound", "block-decay", "duhamel"),
    "besov": ("littlewood-paley", "commutator"),
    "semigroup-scaling": ("oracle", "envelopes", "rough-data"),
    "kolmogorov": ("residual",),
    "density": ("kde",),
}

DEFAULT_GRIDS = {
    "simulate": (4096, 64.0),
    "kernel": (4096, 64.0),
    "besov": (8192, math.pi),
    "semigroup-scaling": (4096, 64.0),
    "kolmogorov": (16, math.pi),
    "density": (4096, 64.0),
}


def gate(cfg: ExperimentConfig) -> None:
    """Reject the configuration before any computation if a hypothesis fails."""
    model = cfg.model()
    check_gate(cfg.alpha, cfg.effective_beta(), cfg.gamma, cfg.eta)
    if cfg.experiment == "semigroup-scaling" and not model.zero_drift:
        if not 0.5 < cfg.alpha < 2:
            raise GateError("hypothesis violated: a non-zero drift needs alpha in (1/2, 2)")


def _default_checks(cfg: ExperimentConfig, model) -> tuple:
    kind = cfg.experiment
    if kind == "kernel":
        out = ["scaling", "symbol-bound"]
        if cfg.dim == 1:
            if cfg.alpha == 1.0 and cfg.preset == "identity":
                out.insert(0, "cauchy")
            out += ["moments", "block-decay", "duhamel"]
        return tuple(out)
    if kind == "semigroup-scaling":
        out = ["envelopes"]
        if cfg.preset == "identity" and cfg.dim == 1:
            out.insert(0, "oracle")
        if cfg.eta > 0:
            out.append("rough-data")
        return tuple(out)
    return KIND_CHECKS[kind]


def plan(cfg: ExperimentConfig) -> list:
    """List of ``(label, thunk)`` pairs the run will execute."""
    model = cfg.model()
    chosen = cfg.checks if cfg.checks is not None else _default_checks(cfg, model)
    unknown = [c for c in chosen if c not in KIND_CHECKS[cfg.experiment]]
    if unknown:
        raise ConfigError(f"unknown check(s) for {cfg.experiment}: {', '.join(unknown)}")
    N, L = cfg.grid(*DEFAULT_GRIDS[cfg.experiment])
    a = cfg.alpha
    tol = cfg.tol
    sigma0 = model.sigma_at(0.0, np.zeros(cfg.dim))
    one_d = ("cauchy", "moments", "block-decay", "duhamel", "oracle", "envelopes", "rough-data",
             "kde")
    for c in chosen:
        if c in one_d and cfg.dim != 1:
            raise ConfigError(f"check {c!r} is implemented for dim = 1 only")
    out = []
    for c in chosen:
        if c == "quantiles":
            out.append((c, lambda: C.check_simulate(cfg.preset, cfg.params, a, cfg.dim,
                                                    cfg.n_paths, cfg.m, cfg.seed,
                                                    cfg.threads, cfg.T)))
        elif c == "cauchy":
            out.append((c, lambda: C.check_cauchy(N, L, tol("cauchy_abs"))))
        elif c == "scaling":
            out.append((c, lambda: C.check_scaling((a,), (0.25, 1.0, 4.0), N, L,
                                                   tol("scaling_rel"), sigma0, cfg.preset)))
        elif c == "moments":
            out.append((c, lambda: C.check_moments((a,), cfg.t_ladder, max(N, 65536), L,
                                                   tol("moment_slope"), sigma0, cfg.preset)))
        elif c == "symbol-bound":
            out.append((c, lambda: C.check_symbol_bound((a,), 20, cfg.seed,
                                                        max(model.c0, 1.0 + 1e-9))))
        elif c == "block-decay":
            J = DyadicDecomposition(N, L, 1).j_max
            js = tuple(range(max(1, J - 5), J + 1))
            out.append((c, lambda js=js: C.check_block_decay((a,), js, N, L, cfg.t_ladder,
                                                             tol("block_slope"), sigma0,
                                                             cfg.preset)))
        elif c == "duhamel":
            out.append((c, lambda: C.check_duhamel(a, 64, tol=tol("duhamel_order"))))
        elif c == "littlewood-paley":
            out.append((c, lambda: C.check_littlewood_paley(
                cfg.seed, 50, tol("partition_abs"), tol("tr1_abs"), tol("lj1_band"),
                sizes=(N // 8, N // 4, N // 2, N))))
        elif c == "commutator":
            b = cfg.beta if cfg.beta is not None and 0 < cfg.beta < 1 else 0.6
            out.append((c, lambda: C.check_commutator(cfg.seed, N, b,
                                                      tol("commutator_margin"))))
        elif c == "oracle":
            out.append((c, lambda: C.check_semigroup_oracle((a,), cfg.n_paths, cfg.m, cfg.seed,
                                                            cfg.threads, cfg.T, 9,
                                                            tol("oracle_stderr"))))
        elif c == "envelopes":
            out.append((c, lambda: C.check_envelopes(cfg.preset, cfg.params, a, cfg.t_ladder,
                                                     cfg.n_paths, cfg.seed, cfg.threads,
                                                     (cfg.gamma,), tol("envelope_slope"),
                                                     tol("fit_rms"))))
        elif c == "rough-data":
            eta = cfg.eta if cfg.eta > 0 else 0.3
            out.append((c, lambda: C.check_rough_data(cfg.preset, cfg.params, a, eta,
                                                      cfg.t_ladder[len(cfg.t_ladder) // 2],
                                                      cfg.n_paths, cfg.seed, cfg.threads)))
        elif c == "residual":
            out.append((c, lambda: C.check_kolmogorov(a, cfg.n_paths, cfg.m, cfg.seed,
                                                      cfg.threads, (N, L), 8, 0.0,
                                                      0.5 * cfg.T, cfg.T,
                                                      tol("kolmogorov_factor"),
                                                      tol("trapezoid_ratio"), cfg.preset,
                                                      cfg.params, cfg.dim)))
        elif c == "kde":
            out.append((c, lambda: C.check_density(a, cfg.n_paths, min(cfg.m, 64), cfg.seed,
                                                   cfg.threads, N, L, cfg.T, tol("kde_l1"),
                                                   tol("kde_mass"), preset=cfg.preset,
                                                   params=cfg.params)))
    return out


def run(cfg: ExperimentConfig) -> Report:
    """Gate, then execute every planned check; timings go to ``report.timing``."""
    gate(cfg)
    steps = plan(cfg)
    report = Report(cfg.experiment, cfg.echo())
    for label, thunk in steps:
        t0 = time.perf_counter()
        report.checks.append(thunk())
        report.timing[label] = time.perf_counter() - t0
    return report
