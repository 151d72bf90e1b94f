import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from cylstable import DomainError, ResolutionError
from cylstable.spectral import (DyadicDecomposition, GridFunction, besov_norm, block, bump_profile,
                                commutator_decay, holder_seminorm, lp_norm, mollifier_factor,
                                mollify, require_resolution, sampled_holder_seminorm,
                                young_constants)


def on_circle(func, N=1024):
    return GridFunction.from_callable(lambda x: func(x[..., 0]), N, math.pi)


@given(st.sampled_from([1, 2, 4, 8, 16]).flatmap(
    lambda n: hnp.arrays(float, n, elements=st.floats(-1e6, 1e6))),
    st.floats(0.1, 100.0))
def test_bytes_round_trip(values, L):
    f = GridFunction(values, L)
    g = GridFunction.from_bytes(f.to_bytes())
    assert g.L == L
    assert np.array_equal(g.values, f.values)


def test_bytes_round_trip_2d(tmp_path):
    f = GridFunction(np.arange(16.0).reshape(4, 4), 2.0)
    f.save(tmp_path / "f.grid")
    g = GridFunction.load(tmp_path / "f.grid")
    assert g.dim == 2 and np.array_equal(g.values, f.values)


def test_bad_bytes():
    f = GridFunction(np.ones(4), 1.0)
    with pytest.raises(DomainError):
        GridFunction.from_bytes(b"short")
    with pytest.raises(DomainError):
        GridFunction.from_bytes(b"X" * 8 + f.to_bytes()[8:])
    with pytest.raises(DomainError):
        GridFunction.from_bytes(f.to_bytes()[:-8])


@pytest.mark.parametrize("values", [np.ones(6), np.ones((4, 8)), np.array([1.0, np.nan])])
def test_bad_grid(values):
    with pytest.raises(DomainError):
        GridFunction(values, 1.0)


def test_spectral_gradient_of_trig_polynomial():
    f = on_circle(lambda x: np.sin(3 * x) + 0.5 * np.cos(x))
    x = f.axis()
    np.testing.assert_allclose(f.gradient()[0], 3 * np.cos(3 * x) - 0.5 * np.sin(x), atol=1e-10)


def test_j_max_convention():
    dec = DyadicDecomposition(1024, math.pi)
    assert dec.nyquist == 512.0
    assert dec.j_max == 8
    assert DyadicDecomposition(4, 64.0).j_max == -1


def test_block_of_pure_dyadic_frequency():
    f = on_circle(lambda x: np.cos(4 * x))
    np.testing.assert_allclose(block(2, f).values, f.values, atol=1e-12)
    for j in (0, 1, 3, 4):
        assert np.abs(block(j, f).values).max() < 1e-12


def test_block_of_constant_is_low_block():
    f = on_circle(lambda x: np.ones_like(x))
    np.testing.assert_allclose(block(0, f).values, 1.0, atol=1e-14)
    assert np.abs(block(1, f).values).max() < 1e-14


def test_block_index_out_of_range():
    f = on_circle(np.sin, N=64)
    with pytest.raises(DomainError):
        block(-1, f)
    with pytest.raises(DomainError):
        block(DyadicDecomposition.for_grid(f).j_max + 1, f)


def test_partition_sums_to_one_below_top_ring():
    dec = DyadicDecomposition(2048, 3.0)
    J = dec.j_max
    r = np.linspace(0.0, 2.0 ** J, 5001)
    total = sum(dec.ring(j, r) for j in range(J + 1))
    np.testing.assert_allclose(total, 1.0, atol=1e-15)
    np.testing.assert_allclose(dec.partial_sum(3), bump_profile(dec._xi / 8.0), atol=1e-15)


@given(st.integers(0, 12), st.integers(0, 12))
def test_almost_orthogonal_rings(j, k):
    r = np.geomspace(1e-3, 1e5, 4000)
    prod = DyadicDecomposition.ring(j, r) * DyadicDecomposition.ring(k, r)
    if abs(j - k) >= 2:
        assert np.all(prod == 0.0)


@given(st.integers(1, 10))
def test_rings_are_rescaled_copies(j):
    r = np.linspace(0.0, 4.0, 401)
    np.testing.assert_allclose(DyadicDecomposition.ring(j, r * 2.0 ** (j - 1)),
                               DyadicDecomposition.ring(1, r), atol=1e-15)


def test_besov_of_zero():
    f = on_circle(np.zeros_like, N=256)
    b = besov_norm(f, 0.7, 1, 1)
    assert b.value == 0.0
    assert len(b.block_norms) == b.j_max + 1


def test_besov_weights_single_block():
    f = on_circle(lambda x: np.cos(8 * x), N=256)
    assert besov_norm(f, 0.5).value == pytest.approx(2.0 ** 1.5, rel=1e-10)
    assert besov_norm(f, 0.5, q=1).value == pytest.approx(2.0 ** 1.5, rel=1e-10)
    with pytest.raises(DomainError):
        besov_norm(f, 0.5, q=0.5)


def test_lp_norm():
    v = np.ones(100)
    assert lp_norm(v, 1, 0.5) == 50.0
    assert lp_norm(v, 2, 0.5) == pytest.approx(math.sqrt(50.0))
    assert lp_norm(-3 * v, math.inf, 0.5) == 3.0
    with pytest.raises(DomainError):
        lp_norm(v, 0.5, 1.0)


def test_holder_of_triangle_wave():
    f = on_circle(np.abs, N=4096)
    assert holder_seminorm(f, 0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert holder_seminorm(f, 1.0) == pytest.approx(1.0, rel=1e-12)


def test_holder_exponent_domain():
    f = on_circle(np.sin, N=64)
    for g in (0.0, 2.0):
        with pytest.raises(DomainError):
            holder_seminorm(f, g)


def test_sampled_holder_of_ramp_and_hat():
    x = np.linspace(0.0, 1.0, 257)
    assert sampled_holder_seminorm(2 * x, x[1], 1.0) == pytest.approx(2.0)
    # square root: the quotient at gamma = 1/2 is 1 at every lag from the origin
    assert sampled_holder_seminorm(np.sqrt(x), x[1], 0.5) == pytest.approx(1.0)
    # x^2 has derivative 2x, whose Lipschitz quotient is 2
    assert sampled_holder_seminorm(x ** 2, x[1], 1.99) == pytest.approx(2.0, rel=0.02)


def test_mollifier_preserves_mean():
    f = on_circle(lambda x: np.abs(np.sin(x)) ** 0.3, N=512)
    g = mollify(f, 0.2)
    assert g.values.mean() == pytest.approx(f.values.mean(), rel=1e-12)
    fac = mollifier_factor(512, math.pi, 1, 0.2)
    assert fac[0] == pytest.approx(1.0)
    assert np.all(np.abs(fac) <= 1.0 + 1e-12)


def test_mollifier_error_decreases_with_radius():
    f = on_circle(lambda x: np.abs(np.sin(x)) ** 0.5, N=4096)
    errs = [np.abs(mollify(f, eps).values - f.values).max() for eps in (0.4, 0.2, 0.1, 0.05)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    with pytest.raises(DomainError):
        mollify(f, 4.0)


def test_commutator_with_constant_vanishes():
    g = on_circle(lambda x: np.abs(np.sin(x)) ** 0.3, N=1024)
    c = on_circle(lambda x: 2.5 + 0 * x, N=1024)
    for j in range(6):
        assert commutator_decay(c, g, j) < 1e-12


def test_commutator_is_not_symmetric():
    f = on_circle(lambda x: np.cos(x), N=1024)
    g = on_circle(lambda x: np.abs(np.sin(x)) ** 0.3, N=1024)
    assert commutator_decay(f, g, 4) != pytest.approx(commutator_decay(g, f, 4), rel=1e-3)


def test_commutator_grids_must_match():
    with pytest.raises(DomainError):
        commutator_decay(on_circle(np.sin, 64), on_circle(np.sin, 128), 1)


def test_young_constants_uniform_in_j():
    c = young_constants(DyadicDecomposition(8192, math.pi))
    # low rings feel the periodisation and top rings the sampling; the rest agree
    mid = c[3:-3]
    assert mid.max() / mid.min() < 1.01
    assert np.all(c >= 1.0) and c.max() < 1.6


@pytest.mark.parametrize("j", [2, 4, 6])
def test_bernstein_inequality(j):
    rng = np.random.default_rng(j)
    f = on_circle(lambda x: sum(rng.standard_normal() * np.cos(k * x + rng.uniform(0, 6))
                                for k in range(1, 200)), N=1024)
    b = block(j, f)
    assert np.abs(b.gradient()[0]).max() <= 2.0 ** (j + 1) * np.abs(b.values).max()


def test_require_resolution():
    require_resolution(64, 64)
    with pytest.raises(ResolutionError) as info:
        require_resolution(32, 128)
    assert info.value.suggested_n == 128
