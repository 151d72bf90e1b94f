import math

import numpy as np
import pytest

from cylstable import AssumptionError, DomainError
from cylstable.models import (CoefficientModel, constant, default_probe_grid, diag_sine,
                              from_preset, holder_drift, identity, rotation_mix, tabulated,
                              validate_assumptions)


def test_identity_passes_with_unit_constants():
    rep = validate_assumptions(identity(2), default_probe_grid(2, n=5))
    assert rep.passed
    assert rep.min_singular == pytest.approx(1.0)
    assert rep.max_singular == pytest.approx(1.0)
    assert rep.max_lipschitz == 0.0
    assert rep.max_drift == 0.0


def test_diag_sine_declared_bounds():
    m = diag_sine(1, amplitude=0.3, c0=2.0)
    rep = validate_assumptions(m, default_probe_grid(1, n=201))
    assert rep.passed
    assert rep.min_singular >= 0.7 - 1e-12
    assert rep.max_singular <= 1.3 + 1e-12
    assert rep.max_lipschitz <= 0.3 + 1e-12


def test_degenerate_sigma_fails_and_reports_point():
    def sigma(t, x):
        return np.asarray(x)[..., None] * np.ones(1)

    m = CoefficientModel(sigma, lambda t, x: np.zeros(np.shape(x)), 1, c0=5.0, c1=1.0)
    rep = validate_assumptions(m, [(0.0, np.array([[-1.0], [0.0], [1.0]]))])
    assert not rep.passed
    assert (0.0, [0.0]) in rep.offending_points


def test_nonfinite_sigma_raises_with_point():
    def sigma(t, x):
        x = np.asarray(x)
        return (1.0 / x)[..., None]

    m = CoefficientModel(sigma, lambda t, x: np.zeros(np.shape(x)), 1, c0=5.0)
    with pytest.raises(AssumptionError) as info:
        with np.errstate(divide="ignore"):
            validate_assumptions(m, [(0.0, np.array([[1.0], [0.0]]))])
    assert info.value.point == (0.0, [0.0])


def test_understated_lipschitz_constant_fails():
    m = diag_sine(1, amplitude=0.3)
    bad = CoefficientModel(m.sigma, m.b, 1, c0=m.c0, c1=0.1)
    rep = validate_assumptions(bad, default_probe_grid(1, n=101))
    assert not rep.passed
    assert any("Lipschitz" in f for f in rep.failures)


def test_holder_drift_constants_hold():
    m = holder_drift(1, beta=0.7)
    rep = validate_assumptions(m, default_probe_grid(1, n=201))
    assert rep.passed, rep.failures
    assert rep.max_holder <= m.c3


def test_rotation_mix_is_elliptic():
    m = rotation_mix(2, scales=[1.0, 1.5])
    rep = validate_assumptions(m, default_probe_grid(2, n=7))
    assert rep.passed, rep.failures


def test_constant_model_with_drift():
    m = constant([[2.0]], drift=[0.5])
    assert m.constant_sigma is not None
    assert not m.zero_drift
    assert m.b_at(0.0, np.array([[3.0]]))[0, 0] == 0.5


def test_tabulated_matches_source_on_nodes_and_clips():
    ax = np.linspace(-1.0, 1.0, 5)
    sv = (1.0 + 0.2 * ax)[:, None, None]
    m = tabulated([ax], sv, c0=2.0, c1=0.2)
    assert m.sigma_at(0.0, np.array([[0.5]]))[0, 0, 0] == pytest.approx(1.1)
    assert m.sigma_at(0.0, np.array([[5.0]]))[0, 0, 0] == pytest.approx(1.2)
    assert validate_assumptions(m, [(0.0, ax[:, None])]).passed


def test_tabulated_shape_mismatch():
    with pytest.raises(DomainError):
        tabulated([np.linspace(0, 1, 3)], np.ones((4, 1, 1)), c0=1.0, c1=0.0)


def test_presets_and_alias():
    assert from_preset("holder-drift", 1).name == from_preset("hölder-drift", 1).name
    with pytest.raises(DomainError):
        from_preset("nope")


def test_bad_declared_constants():
    with pytest.raises(DomainError):
        CoefficientModel(lambda t, x: x, lambda t, x: x, 1, c0=0.5)
    with pytest.raises(DomainError):
        CoefficientModel(lambda t, x: x, lambda t, x: x, 1, beta=1.5)


def test_holder_drift_c3_formula():
    assert holder_drift(2, beta=0.5, strength=1.0).c3 == pytest.approx(2 ** 0.5 * math.sqrt(2))
