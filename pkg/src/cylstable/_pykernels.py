"""Pure-numpy versions of the compiled kernels.

The integer hash is bit-identical to ``_kernels.pyx``; floating results agree
up to libm rounding. Python-level coefficient callables are only supported
here, so generic (non-preset) models always run through this module.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_G = np.uint64(_GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(k) for k in (30, 27, 31, 11))
_TWO_M53 = 1.0 / 9007199254740992.0


def _mix64_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def path_keys(seed: int, paths: np.ndarray) -> np.ndarray:
    p = np.asarray(paths, dtype=np.int64).astype(np.uint64) + np.uint64(1)
    return _mix64(np.uint64(seed & _MASK) + _G * p)


def counter_uniform(keys: np.ndarray, step: int, coord: int, lane: int) -> np.ndarray:
    c = ((step << 20) | (coord << 1) | lane) & _MASK
    salt = np.uint64(_mix64_int(c + _GOLDEN))
    h = _mix64(keys ^ salt)
    return ((h >> _S11).astype(np.float64) + 0.5) * _TWO_M53


def cms(alpha: float, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Symmetric Chambers-Mallows-Stuck transform, characteristic fn exp(-|xi|^alpha)."""
    v = np.pi * (u1 - 0.5)
    if alpha == 1.0:
        return np.tan(v)
    # both powers folded into one exp; cos(v) and cos((1 - alpha) v) are positive
    lw = np.log(-np.log(u2))
    e = ((1.0 - alpha) * (np.log(np.cos((1.0 - alpha) * v)) - lw) - np.log(np.cos(v))) / alpha
    return np.sin(alpha * v) * np.exp(e)


def stable_draws(keys: np.ndarray, step: int, coord: int, alpha: float) -> np.ndarray:
    return cms(alpha, counter_uniform(keys, step, coord, 0), counter_uniform(keys, step, coord, 1))


def stable_fill(out, seed, path0, step, alpha, scale, nthreads=1):
    n, d = out.shape
    keys = path_keys(seed, np.arange(path0, path0 + n, dtype=np.int64))
    for i in range(d):
        out[:, i] = scale * stable_draws(keys, step, i, alpha)


def _euler_block(X, censored, keys, step0, m, s, dt, alpha, scale, sigma, drift):
    n, K, d = X.shape
    dz = np.empty((n, d))
    for k in range(m):
        t = s + k * dt
        for i in range(d):
            dz[:, i] = scale * stable_draws(keys, step0 + k, i, alpha)
        sig = sigma(t, X)
        b = drift(t, X)
        Xn = X + b * dt + np.einsum("nkil,nl->nki", sig, dz)
        bad = ~np.all(np.isfinite(Xn), axis=-1)
        live = ~censored.astype(bool)
        upd = live & ~bad
        X[upd] = Xn[upd]
        censored[live & bad] = 1


def euler_chunk(X, censored, seed, path0, step0, m, s, dt, alpha, scale,
                sigma, drift, nthreads=1, block=8192):
    """Numpy Euler stepper; ``sigma``/``drift`` are vectorised callables (t, x[..., d])."""
    n = X.shape[0]
    keys = path_keys(seed, np.arange(path0, path0 + n, dtype=np.int64))
    bounds = [(a, min(a + block, n)) for a in range(0, n, block)]

    def work(ab):
        a, b = ab
        _euler_block(X[a:b], censored[a:b], keys[a:b], step0, m, s, dt, alpha, scale, sigma, drift)

    if nthreads <= 1 or len(bounds) <= 1:
        for ab in bounds:
            work(ab)
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(work, bounds))
