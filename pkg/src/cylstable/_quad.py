"""Integrals of cos(u) u^(-1-alpha) on half-lines.

Three regimes: a power series near the origin, composite Gauss-Legendre
panels in the middle, and the integration-by-parts asymptotic expansion
for the far tail.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_GL_ORDER = 16
_ASYM_START = 40.0
_SERIES_MAX = 2.0


@lru_cache(maxsize=8)
def _gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def series_one_minus_cos(a, alpha: float):
    """int_0^a (1 - cos u) u^(-1-alpha) du by termwise integration.

    Accurate for ``a`` up to a few units (alternating series).
    """
    a = np.asarray(a, dtype=float)
    total = np.zeros_like(a)
    term_pow = np.ones_like(a)
    a2 = a * a
    fact = 1.0
    for k in range(1, 40):
        fact *= (2 * k - 1) * (2 * k)
        term_pow = term_pow * a2
        term = (-1) ** (k + 1) * term_pow / (fact * (2 * k - alpha))
        total = total + term
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(total), 1e-300)):
            break
    return total * a ** (-alpha)


def asymptotic_cos_tail(U, alpha: float, max_terms: int = 60):
    """int_U^inf cos(u) u^(-1-alpha) du from the repeated integration by parts.

    I_a(U) = i e^{iU} sum_k (-i)^k (a)_k U^(-a-k),  a = 1 + alpha.
    Terms are summed while they decrease.
    """
    U = np.asarray(U, dtype=float)
    a = 1.0 + alpha
    total = np.zeros(U.shape, dtype=complex)
    coef = 1.0 + 0j
    prev = np.full(U.shape, np.inf)
    for k in range(max_terms):
        term = coef * U ** (-a - k)
        mag = np.abs(term)
        use = mag < prev
        total = total + np.where(use, term, 0.0)
        prev = np.where(use, mag, 0.0)
        if np.all(mag < 1e-19 * np.abs(total) + 1e-300):
            break
        coef = coef * (-1j) * (a + k)
    return np.real(1j * np.exp(1j * U) * total)


def _panel_cos(lo, hi, alpha: float, n_panels: int):
    """Composite Gauss-Legendre for int_lo^hi cos(u) u^(-1-alpha), vectorised over lo/hi."""
    x, w = _gauss_legendre(_GL_ORDER)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = (hi - lo) / n_panels
    out = np.zeros(np.broadcast(lo, hi).shape)
    for p in range(n_panels):
        a = lo + p * width
        mid = a + 0.5 * width
        u = mid[..., None] + 0.5 * width[..., None] * x
        out = out + 0.5 * width * np.sum(w * np.cos(u) * u ** (-1.0 - alpha), axis=-1)
    return out


def cos_tail(a, alpha: float):
    """int_a^inf cos(u) u^(-1-alpha) du for a > 0 (vectorised)."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    small = a < _SERIES_MAX
    big = a >= _ASYM_START
    mid = ~(small | big)
    if np.any(small):
        s = a[small]
        out[small] = (-0.5 * levy_constant_series(alpha)
                      + series_one_minus_cos(s, alpha)
                      + s ** (-alpha) / alpha)
    if np.any(mid):
        s = a[mid]
        out[mid] = (_panel_cos(s, np.full_like(s, _ASYM_START), alpha, 96)
                    + asymptotic_cos_tail(_ASYM_START, alpha))
    if np.any(big):
        out[big] = asymptotic_cos_tail(a[big], alpha)
    return out


@lru_cache(maxsize=256)
def levy_constant_series(alpha: float, panel_width: float = math.pi / 8) -> float:
    """2 * int_0^inf (1 - cos u) u^(-1-alpha) du.

    [0, 1] by the power series, [1, U] by Gauss-Legendre panels of the given
    width, [U, inf) by the asymptotic expansion, with U fixed at 400.
    """
    U = 400.0
    head = float(series_one_minus_cos(1.0, alpha))
    n_panels = int(math.ceil((U - 1.0) / panel_width))
    middle = float(_panel_cos(np.array(1.0), np.array(U), alpha, n_panels))
    tail = float(asymptotic_cos_tail(U, alpha))
    return 2.0 * (head + 1.0 / alpha - middle - tail)
