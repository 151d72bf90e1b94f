import math

import numpy as np
import pytest

from cylstable import DomainError, StableSpec
from cylstable.models import CoefficientModel, constant, from_preset, identity
from cylstable.semigroup import (MCConfig, apply_generator, density_estimate, estimate_semigroup,
                                 gradient_sup, holder_seminorm_probe, kolmogorov_residual,
                                 kolmogorov_trapezoid_part, silverman_bandwidth)
from cylstable.spectral import GridFunction


def cos1(X):
    return np.cos(X[..., 0])


def test_constant_function_is_preserved_exactly():
    spec = StableSpec(1.2, 1)
    est = estimate_semigroup(identity(1), spec, lambda X: np.ones(X.shape[:-1]), 0.0, 1.0,
                             np.linspace(-1, 1, 5), MCConfig(2000, 4, seed=1))
    assert np.all(est.values == 1.0)
    assert np.all(est.stderr == 0.0)
    assert est.within_contraction(1.0)


@pytest.mark.parametrize("alpha", [0.7, 1.5])
def test_cosine_oracle(alpha):
    spec = StableSpec(alpha, 1)
    x = np.linspace(-2, 2, 7)
    est = estimate_semigroup(identity(1), spec, cos1, 0.0, 0.5, x, MCConfig(100_000, 4, seed=3))
    exact = np.cos(x) * math.exp(-spec.c_alpha * 0.5)
    assert np.all(np.abs(est.values - exact) < 3.5 * est.stderr)


def test_noise_floor_halves_with_four_times_the_paths():
    spec = StableSpec(1.0, 1)
    se = [estimate_semigroup(identity(1), spec, cos1, 0.0, 0.2, [0.0], MCConfig(n, 4, seed=2))
          .stderr[0] for n in (20_000, 80_000)]
    assert se[1] / se[0] == pytest.approx(0.5, rel=0.05)


def test_stderr_ceiling_flags():
    spec = StableSpec(1.0, 1)
    est = estimate_semigroup(identity(1), spec, cos1, 0.0, 0.2, [0.0],
                             MCConfig(100, 4, seed=2, stderr_ceiling=1e-6))
    assert est.flagged


def test_gradient_of_constant_is_zero():
    spec = StableSpec(1.5, 1)
    g = gradient_sup(identity(1), spec, lambda X: np.full(X.shape[:-1], 2.0), 0.0, 1.0,
                     np.linspace(-1, 1, 3), 0.01, MCConfig(1000, 4, seed=0))
    assert g.value == 0.0 and g.stderr == 0.0


def test_gradient_of_cosine():
    spec = StableSpec(1.5, 1)
    x = np.linspace(-math.pi, math.pi, 17)
    g = gradient_sup(identity(1), spec, cos1, 0.0, 0.3, x, 1e-3, MCConfig(50_000, 4, seed=4))
    target = math.exp(-spec.c_alpha * 0.3) * math.cos(1e-3) * math.sin(1e-3) / 1e-3
    assert abs(g.value - target) < 4 * g.stderr + 1e-3 * target
    assert not g.warnings
    big = gradient_sup(identity(1), spec, cos1, 0.0, 0.3, x, 0.5, MCConfig(10, 4, seed=4))
    assert big.warnings
    with pytest.raises(DomainError):
        gradient_sup(identity(1), spec, cos1, 0.0, 0.3, x, 0.0, MCConfig(10, 4))


def test_holder_probe():
    spec = StableSpec(1.0, 1)
    est = estimate_semigroup(identity(1), spec, lambda X: np.ones(X.shape[:-1]), 0.0, 1.0,
                             np.linspace(0, 1, 9), MCConfig(100, 2))
    assert holder_seminorm_probe(est, 0.5) == 0.0
    est.x_grid = np.array([[0.0], [0.1], [0.5]])
    est.values = np.zeros(3)
    with pytest.raises(DomainError):
        holder_seminorm_probe(est, 0.5)


def wave(k, N=32):
    return GridFunction.from_callable(lambda x: np.cos(k * x[..., 0]), N, math.pi)


@pytest.mark.parametrize("alpha", [0.7, 1.0, 1.5])
def test_generator_matches_symbol(alpha):
    u = wave(3)
    spec = StableSpec(alpha, 1)
    Lu = apply_generator(identity(1), u, 0.0, alpha)
    np.testing.assert_allclose(Lu.values, -spec.c_alpha * 3 ** alpha * u.values, rtol=0,
                               atol=1e-6 * spec.c_alpha * 3 ** alpha)


@pytest.mark.parametrize("alpha", [0.8, 1.6])
def test_generator_routes_agree(alpha):
    """The per-point mode sum agrees with the FFT multiplier for a constant sigma."""
    u = GridFunction.from_callable(lambda x: np.exp(np.sin(x[..., 0])), 32, math.pi)
    fast = constant([[1.7]])
    slow = CoefficientModel(lambda t, x: np.full(np.shape(x) + (1,), 1.7),
                            lambda t, x: np.zeros(np.shape(x)), 1, c0=2.0)
    a = apply_generator(fast, u, 0.0, alpha).values
    b = apply_generator(slow, u, 0.0, alpha).values
    np.testing.assert_allclose(a, b, atol=1e-8 * np.abs(a).max())


def test_generator_of_constant_is_zero():
    u = GridFunction(np.full(16, 3.0), math.pi)
    assert np.abs(apply_generator(identity(1), u, 0.0, 1.3).values).max() < 1e-12


def test_generator_drift_term():
    u = wave(1)
    plain = apply_generator(constant([[1.0]]), u, 0.0, 1.1).values
    drift = apply_generator(constant([[1.0]], drift=[0.4]), u, 0.0, 1.1).values
    np.testing.assert_allclose(drift - plain, -0.4 * np.sin(u.axis()), atol=1e-12)


def test_kolmogorov_constant_phi():
    spec = StableSpec(1.5, 1)
    res = kolmogorov_residual(identity(1), spec, lambda X: np.ones(X.shape[:-1]), 0.0, 0.5, 1.0,
                              MCConfig(200, 4, seed=1), n_s=2, grid=(8, math.pi), batches=2)
    assert res.residual < 1e-12
    with pytest.raises(DomainError):
        kolmogorov_residual(identity(1), spec, cos1, 0.5, 0.5, 1.0, MCConfig(10, 2))


def test_kolmogorov_trapezoid_part_for_exact_semigroup():
    spec = StableSpec(1.5, 1)
    c = spec.c_alpha

    def exact(s, X):
        return np.cos(X[..., 0]) * math.exp(-c * (1.0 - s))

    det, bound = kolmogorov_trapezoid_part(identity(1), spec, exact, 0.0, 0.5, 1.0, n_s=8,
                                           grid=(16, math.pi))
    assert det <= bound
    det16, _ = kolmogorov_trapezoid_part(identity(1), spec, exact, 0.0, 0.5, 1.0, n_s=16,
                                         grid=(16, math.pi))
    assert det16 / det == pytest.approx(0.25, rel=0.05)


def test_silverman_bandwidth():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(100_000)
    assert silverman_bandwidth(x) == pytest.approx(0.9 * 100_000 ** -0.2, rel=0.02)
    with pytest.raises(DomainError):
        silverman_bandwidth([1.0])
    with pytest.raises(DomainError):
        silverman_bandwidth(np.zeros(10))


def test_density_estimate_mass_and_shape():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(50_000)
    est = density_estimate(x, 0.1, (512, 8.0))
    assert est.total_mass == pytest.approx(1.0, abs=1e-9)
    grid = est.density.axis()
    gauss = np.exp(-grid ** 2 / (2 * 1.01)) / math.sqrt(2 * math.pi * 1.01)
    assert np.abs(est.density.values - gauss).sum() * est.density.dx < 0.03
    far = density_estimate(x + 7.9, 0.1, (512, 8.0))
    assert far.out_of_box_mass > 0.4
    # the in-box Riemann sum is first order where the density is large at the edge
    edge = far.density.dx * far.density.values.max()
    assert far.total_mass == pytest.approx(1.0, abs=edge)


def test_density_estimate_errors():
    with pytest.raises(DomainError):
        density_estimate(np.zeros(10), 0.0, (64, 1.0))
    with pytest.raises(DomainError):
        density_estimate(np.zeros((0, 1)), 0.1, (64, 1.0))


@pytest.mark.parametrize("preset", ["identity", "diag-sine", "holder-drift"])
def test_chapman_kolmogorov_split(preset):
    """P_{0,1} phi equals P_{0,1/2} applied to a tabulated P_{1/2,1} phi."""
    model = from_preset(preset, 1)
    spec = StableSpec(1.5, 1)
    grid = np.linspace(-math.pi, math.pi, 128, endpoint=False)
    inner = estimate_semigroup(model, spec, cos1, 0.5, 1.0, grid, MCConfig(20_000, 16, seed=1))

    def tabulated(X):
        return np.interp(X[..., 0], grid, inner.values, period=2 * math.pi)

    xs = np.array([-2.0, -0.5, 0.0, 1.0, 2.5])
    outer = estimate_semigroup(model, spec, tabulated, 0.0, 0.5, xs, MCConfig(20_000, 16, seed=2))
    direct = estimate_semigroup(model, spec, cos1, 0.0, 1.0, xs, MCConfig(40_000, 32, seed=3))
    # the interpolant of a smooth periodic function on 128 nodes adds ~1e-4
    se = np.sqrt(outer.stderr ** 2 + direct.stderr ** 2 + inner.stderr.max() ** 2)
    assert np.all(np.abs(outer.values - direct.values) < 3.5 * se + 1e-3)
