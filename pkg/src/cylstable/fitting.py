"""Least-squares exponent fits in log-log coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError

__all__ = ["ScalingFit", "fit_exponent"]


@dataclass(frozen=True)
class ScalingFit:
    """Fit of log(y) = intercept + slope * log(x), natural logarithms.

    ``ci_half_width`` is the 95% Student-t half-width of the slope.
    """

    x: tuple
    y: tuple
    slope: float
    intercept: float
    residual_rms: float
    ci_half_width: float

    @property
    def n_points(self) -> int:
        return len(self.x)

    def predict(self, x):
        return np.exp(self.intercept) * np.asarray(x, dtype=float) ** self.slope

    def envelope_constant(self, slope=None) -> float:
        """Smallest C with y <= C x^slope at every point (default: fitted slope)."""
        k = self.slope if slope is None else slope
        return float(max(yy / xx ** k for xx, yy in zip(self.x, self.y)))

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual_rms": self.residual_rms,
            "ci_half_width": self.ci_half_width,
            "n_points": self.n_points,
            "x": list(self.x),
            "y": list(self.y),
        }


def fit_exponent(points=None, *, x=None, y=None) -> ScalingFit:
    """Fit a power law to ``points`` (pairs) or to ``x``/``y`` arrays."""
    if points is not None:
        pts = [(float(a), float(b)) for a, b in points]
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
    else:
        xs = np.asarray(x, dtype=float).ravel()
        ys = np.asarray(y, dtype=float).ravel()
    if xs.size != ys.size:
        raise DomainError("x and y have different lengths")
    if xs.size < 4:
        raise DomainError(f"need at least 4 points for an exponent fit, got {xs.size}")
    if np.any(xs <= 0) or np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        raise DomainError("abscissae and ordinates must be positive and finite")
    lx = np.log(xs)
    ly = np.log(ys)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    n = xs.size
    rms = float(math.sqrt(np.mean(resid ** 2)))
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    if sxx == 0:
        raise DomainError("abscissae must not all coincide")
    s2 = float(np.sum(resid ** 2)) / (n - 2)
    half = float(stats.t.ppf(0.975, n - 2) * math.sqrt(s2 / sxx))
    return ScalingFit(tuple(xs.tolist()), tuple(ys.tolist()), float(slope), float(intercept),
                      rms, half)
