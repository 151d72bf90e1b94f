import math

import numpy as np
import pytest
from scipy import stats

from cylstable import DomainError, StableSpec, simulate
from cylstable import _backend
from cylstable.models import constant, diag_sine, holder_drift, identity, rotation_mix


@pytest.mark.parametrize("alpha", [0.7, 1.5])
def test_identity_characteristic_function(alpha):
    spec = StableSpec(alpha, 1)
    n = 200_000
    b = simulate(identity(1), spec, 0.0, 0.5, [[0.3]], m=4, n_paths=n, seed=2)
    inc = b.values[:, 0, 0] - 0.3
    for xi in (0.5, 1.0, 2.0):
        target = math.exp(-spec.c_alpha * 0.5 * xi ** alpha)
        c = np.cos(xi * inc)
        assert abs(c.mean() - target) < 3 * c.std() / math.sqrt(n) + 1e-12


def test_constant_drift_decouples():
    spec = StableSpec(1.2, 2)
    x0 = np.array([[0.1, -0.2]])
    base = simulate(constant(np.eye(2)), spec, 0.0, 1.0, x0, m=8, n_paths=500, seed=4,
                    backend="python")
    drifted = simulate(constant(np.eye(2), drift=[0.5, -1.0]), spec, 0.0, 1.0, x0, m=8,
                       n_paths=500, seed=4, backend="python")
    np.testing.assert_allclose(drifted.values - base.values, np.broadcast_to([0.5, -1.0],
                                                                               base.values.shape),
                               rtol=0, atol=1e-12)


def test_step_count_does_not_change_constant_coefficient_law():
    spec = StableSpec(1.0, 1)
    a = simulate(identity(1), spec, 0.0, 1.0, [[0.0]], m=1, n_paths=50_000, seed=1)
    b = simulate(identity(1), spec, 0.0, 1.0, [[0.0]], m=7, n_paths=50_000, seed=2)
    ks = stats.ks_2samp(a.values[:, 0, 0], b.values[:, 0, 0])
    assert ks.pvalue > 1e-3


def test_flow_consistency_two_legs():
    """s -> r -> t with re-seeded legs matches s -> t in law on bounded functionals."""
    model = diag_sine(1, amplitude=0.3)
    spec = StableSpec(1.5, 1)
    n = 100_000
    one = simulate(model, spec, 0.0, 1.0, [[0.2]], m=32, n_paths=n, seed=10)
    leg1 = simulate(model, spec, 0.0, 0.5, [[0.2]], m=16, n_paths=n, seed=11)
    leg2 = simulate(model, spec, 0.5, 1.0, leg1.values, m=16, n_paths=n, seed=12)
    for f in (np.cos, np.sin, np.tanh):
        a, b = f(one.values[:, 0, 0]), f(leg2.values[:, 0, 0])
        se = math.sqrt(a.var() / n + b.var() / n)
        assert abs(a.mean() - b.mean()) < 3 * se


@pytest.mark.parametrize("model", [identity(2), diag_sine(2), holder_drift(2), rotation_mix(2)],
                         ids=lambda m: m.name)
def test_thread_count_and_chunking_do_not_matter(model):
    spec = StableSpec(1.3, 2)
    x0 = np.array([[0.0, 0.0], [1.0, -1.0]])
    a = simulate(model, spec, 0.0, 1.0, x0, m=16, n_paths=3000, seed=5, threads=1)
    b = simulate(model, spec, 0.0, 1.0, x0, m=16, n_paths=3000, seed=5, threads=4, chunk=700)
    assert np.array_equal(a.values, b.values)


def test_path_offset_continues_a_run():
    spec = StableSpec(0.9, 1)
    full = simulate(identity(1), spec, 0.0, 1.0, [[0.0]], m=4, n_paths=100, seed=3)
    part = simulate(identity(1), spec, 0.0, 1.0, [[0.0]], m=4, n_paths=30, seed=3, path0=70)
    assert np.array_equal(full.values[70:], part.values)


def test_common_random_numbers_across_start_points():
    spec = StableSpec(1.0, 1)
    b = simulate(identity(1), spec, 0.0, 1.0, [[0.0], [1.0]], m=4, n_paths=100, seed=3)
    np.testing.assert_allclose(b.values[:, 1, 0] - b.values[:, 0, 0], 1.0, atol=1e-12)


@pytest.mark.skipif(_backend.compiled() is None, reason="compiled extension not built")
@pytest.mark.parametrize("model", [identity(1), diag_sine(1), holder_drift(1, beta=0.6)],
                         ids=lambda m: m.name)
def test_backends_agree(model):
    spec = StableSpec(1.4, 1)
    kw = dict(m=32, n_paths=2000, seed=8)
    a = simulate(model, spec, 0.0, 1.0, [[0.3]], backend="compiled", **kw)
    b = simulate(model, spec, 0.0, 1.0, [[0.3]], backend="python", **kw)
    np.testing.assert_allclose(a.values, b.values, rtol=1e-9, atol=1e-9)


def test_censoring_rate_under_valid_model():
    b = simulate(diag_sine(1), StableSpec(0.6, 1), 0.0, 1.0, [[0.0]], m=64, n_paths=20_000,
                 seed=1)
    assert b.censoring_rate < 1e-6


def test_zero_paths():
    b = simulate(identity(1), StableSpec(1.0, 1), 0.0, 1.0, [[0.0]], m=4, n_paths=0)
    assert b.values.shape == (0, 1, 1)
    assert b.censoring_rate == 0.0


def test_argument_errors():
    spec = StableSpec(1.0, 1)
    with pytest.raises(DomainError):
        simulate(identity(1), spec, 1.0, 1.0, [[0.0]])
    with pytest.raises(DomainError):
        simulate(identity(1), spec, 0.0, 1.0, [[0.0]], m=0)
    with pytest.raises(DomainError):
        simulate(identity(2), spec, 0.0, 1.0, [[0.0]])
    with pytest.raises(DomainError):
        simulate(identity(1), spec, 0.0, 1.0, np.zeros((3, 2)))
