import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concrete_fatigue import material as m
from concrete_fatigue.errors import SingularTangent


def test_elastic_constants(params):
    assert params.youngs_modulus == pytest.approx(45000.0, rel=1e-12)
    assert params.poisson_ratio == pytest.approx(0.2, rel=1e-12)


def test_lateral_strain_elastic(params):
    assert m.lateral_strain(params, 50.0, 0.0) == pytest.approx(0.2 * 50 / 45000, rel=1e-12)
    assert m.lateral_strain(params, 0.0, 0.0) == 0.0


def test_residual_lateral_strain(params):
    # D(0.1) = 50000 * (62500 + 48.4) - 2 * 12723.75**2
    d = 50000.0 * 62548.4 - 2 * 12723.75 ** 2
    eps2 = m.lateral_strain(params, 0.0, 0.1)
    assert eps2 == pytest.approx(10 * 0.1 * 50000.0 / d, rel=1e-12)
    assert eps2 == pytest.approx(1.7834e-5, rel=1e-4)


def test_axial_strain_elastic(params):
    eps2 = m.lateral_strain(params, 50.0, 0.0)
    eps1 = m.axial_strain(params, 50.0, eps2, 0.0)
    assert eps1 == pytest.approx(50 / 45000, rel=1e-12)
    assert eps2 / eps1 == pytest.approx(0.2, rel=1e-12)
    assert m.axial_strain(params, 0.0, 0.0, 0.0) == 0.0


def test_yield_value(params):
    assert m.yield_value(params, 2.2222e-4, 0.0) == pytest.approx(2.2222e-3)
    assert m.yield_value(params, 3.8e-4, 0.5) == pytest.approx(1.9e-3)
    assert m.yield_value(params, 0.0, 0.3) <= 0


def test_kappa_pristine(params):
    d0 = m.lateral_denominator(params, 0.0)
    assert d0 == pytest.approx(2.8125e9)
    g_term = params.g * params.g / (2 * params.C1)
    e_mod = params.lam + 2 * params.mu
    assert m.kappa(params, 0.0, 0.0, 0.0) == pytest.approx(d0 - e_mod * g_term)
    assert m.kappa(params, 0.0, 0.0, 0.0, form="threshold") == pytest.approx(d0 - g_term)
    assert m.kappa(params, 0.0, 0.0, 0.0) > 0


@pytest.mark.parametrize("sbar1,w_from", [(20.0, 0.0), (90.0, 0.5)])
def test_kappa_decreases_with_damage(params, sbar1, w_from):
    vals = []
    for w in np.arange(w_from, 5.01, 0.5):
        st_ = m.equilibrium_state(params, sbar1, w)
        vals.append(m.kappa(params, st_.eps1, st_.eps2, w))
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_damage_increment_signs(params):
    st_ = m.equilibrium_state(params, 90.0, 0.0)
    assert m.damage_increment(params, st_, 0.0) == 0.0
    assert m.damage_increment(params, st_, -1.0) == 0.0
    assert m.damage_increment(params, st_, 1.0) > 0.0


def test_clamped_yield_switches_off_subthreshold_growth(params):
    p = params.with_(clamp_yield=True)
    st_ = m.equilibrium_state(p, 10.0, 2.0)
    assert m.yield_value(p, st_.eps2, 2.0) < 0
    assert m.damage_increment(p, st_, 1.0) == 0.0
    assert m.damage_increment(params, st_, 1.0) > 0.0


def test_singular_lateral_stiffness(params):
    # D shrinks with damage since alpha + beta is small relative to alpha^2
    w = 1.0
    while m.lateral_denominator(params, w) > 0:
        w *= 2
    with pytest.raises(SingularTangent):
        m.lateral_strain(params, 10.0, w)


def test_step_same_stress_is_noop(params):
    s = m.equilibrium_state(params, 20.0, 0.01)
    out = m.step(params, s, 20.0, substeps=5)
    assert out.omega2 == s.omega2
    assert out.eps1 == pytest.approx(s.eps1)


def test_cycle_grows_damage(params):
    s = m.equilibrium_state(params, 20.0, 0.0)
    top = m.step(params, s, 90.0)
    bottom = m.step(params, top, 20.0)
    assert bottom.omega2 > 0
    assert bottom.omega2 == top.omega2     # unloading adds nothing


def test_substep_convergence(params):
    s = m.equilibrium_state(params, 20.0, 0.5)
    d = [m.step(params, s, 90.0, substeps=k).omega2 - 0.5 for k in (10, 20, 40)]
    assert abs(d[0] - d[2]) / d[1] < 0.02


def test_invalid_parameters():
    with pytest.raises(ValueError):
        m.MaterialParameters(mu=0.0)
    with pytest.raises(ValueError):
        m.MaterialParameters(kappa_form="other")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 95.0), min_size=2, max_size=12))
def test_damage_non_decreasing(path):
    p = m.MaterialParameters()
    state = m.equilibrium_state(p, path[0], 0.0)
    for target in path[1:]:
        nxt = m.step(p, state, target, substeps=4)
        assert nxt.omega2 >= state.omega2
        assert math.isfinite(nxt.omega2)
        state = nxt
