import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cylstable import DomainError, StableSpec, levy_constant, sample_increments, sample_standard_stable

# c_alpha from an independent mpmath quadrature (near part on [0, 1], oscillatory tail)
C_ALPHA_ORACLE = {
    0.5: 5.0132565492620010048,
    0.7: 3.8804111420731983797,
    1.5: 3.3421710328413340032,
}


def closed_form(alpha):
    return math.pi / (math.gamma(1 + alpha) * math.sin(math.pi * alpha / 2))


def test_levy_constant_alpha_one_is_pi():
    assert levy_constant(1.0) == pytest.approx(math.pi, rel=1e-12)


@pytest.mark.parametrize("alpha", sorted(C_ALPHA_ORACLE))
def test_levy_constant_matches_high_precision_quadrature(alpha):
    assert levy_constant(alpha) == pytest.approx(C_ALPHA_ORACLE[alpha], rel=1e-10)


def test_levy_constant_independent_of_panel_width():
    assert levy_constant(0.5, math.pi / 16) == pytest.approx(levy_constant(0.5), rel=1e-10)


@given(st.floats(0.05, 1.95))
def test_levy_constant_closed_form(alpha):
    assert levy_constant(alpha) == pytest.approx(closed_form(alpha), rel=1e-9)


@pytest.mark.parametrize("alpha", [0.0, 2.0, -1.0, float("nan")])
def test_bad_alpha(alpha):
    with pytest.raises(DomainError):
        StableSpec(alpha)


def test_cauchy_quartiles():
    n = 1_000_000
    z = sample_standard_stable(1.0, n, seed=11)
    # standard errors of sample quantiles for the standard Cauchy law
    for q, target in ((0.25, -1.0), (0.5, 0.0), (0.75, 1.0)):
        dens = 1.0 / (math.pi * (1 + target ** 2))
        se = math.sqrt(q * (1 - q) / n) / dens
        assert abs(np.quantile(z, q) - target) < 3 * se


def test_characteristic_function_alpha_15():
    n = 1_000_000
    z = sample_standard_stable(1.5, n, seed=5)
    assert abs(np.mean(np.cos(z)) - math.exp(-1.0)) < 3 / math.sqrt(n)


def test_same_seed_same_output():
    a = sample_standard_stable(0.8, 1000, seed=3)
    b = sample_standard_stable(0.8, 1000, seed=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_standard_stable(0.8, 1000, seed=4))


def test_prefix_stable_and_thread_independent():
    a = sample_standard_stable(1.3, 5000, seed=9)
    b = sample_standard_stable(1.3, 2000, seed=9, threads=4)
    assert np.array_equal(a[:2000], b)


def test_increment_scaling_property():
    spec = StableSpec(1.2, 1)
    n = 200_000
    a = sample_increments(spec, 0.01, n, seed=1).values[:, 0]
    b = sample_increments(spec, 0.04, n, seed=2).values[:, 0]
    lam = 4.0 ** (1 / 1.2)
    for q in (0.2, 0.35, 0.65, 0.8):
        qa, qb = np.quantile(a, q), np.quantile(b, q)
        assert qb / qa == pytest.approx(lam, rel=0.03)


def test_increments_cauchy_scale_pi():
    n = 400_000
    x = sample_increments(StableSpec(1.0, 1), 1.0, n, seed=8).values[:, 0]
    assert abs(np.mean(np.cos(x)) - math.exp(-math.pi)) < 3 / math.sqrt(n)


def test_empty_increments():
    m = sample_increments(StableSpec(1.0, 3), 0.5, 0, seed=0)
    assert m.values.shape == (0, 3)
    assert m.n_paths == 0


def test_increments_same_split_across_paths():
    spec = StableSpec(0.9, 2)
    full = sample_increments(spec, 0.1, 100, seed=7, step=3).values
    tail = sample_increments(spec, 0.1, 40, seed=7, step=3, path0=60).values
    assert np.array_equal(full[60:], tail)


def test_symmetry():
    z = sample_standard_stable(1.7, 200_000, seed=21)
    pos, neg = np.mean(z > 0), np.mean(z < 0)
    assert abs(pos - neg) < 3 * math.sqrt(1 / len(z))


@pytest.mark.parametrize("seed", [-1, 2 ** 64])
def test_bad_seed(seed):
    with pytest.raises(DomainError):
        sample_standard_stable(1.0, 10, seed)
