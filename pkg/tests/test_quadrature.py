"""Quadrature engine checks against closed forms and the independent rule."""

import math

import numpy as np
import pytest

from brosc.quadrature import (IntegrandSpec, QuadratureError, cross_check,
                              integrate_semi_infinite)

# closed form: Int_0^inf du / [(1-u^2)^2 + u^2/Q^2] = pi Q / 2 for any Q > 0
# (residue evaluation of the damped-oscillator response integral)


def lorentz(u, q):
    return (1.0 - u * u) ** 2 + (u / q) ** 2


def test_analytic_arctan_benchmark():
    spec = IntegrandSpec(fn=lambda u: 1.0 / (1.0 + u * u))
    res = integrate_semi_infinite(spec, rel_tol=1e-10)
    assert res.converged
    assert res.value == pytest.approx(math.pi / 2.0, rel=1e-10)


def test_zero_integrand():
    spec = IntegrandSpec(fn=lambda u: np.zeros_like(u))
    res = integrate_semi_infinite(spec, rel_tol=1e-6)
    assert res.value == 0.0
    assert res.abs_error == 0.0


@pytest.mark.parametrize("q", [0.6, 2.0, 10.0, 40.0])
@pytest.mark.parametrize("t_tilde", [0.3, 2.0])
def test_classical_potential_closed_form(q, t_tilde):
    # classical <V> integrand: u * (T~/u) / L = T~ / L, integral T~ pi Q / 2
    spec = IntegrandSpec(fn=lambda u: t_tilde / lorentz(u, q), peak_width=5.0 / q)
    res = integrate_semi_infinite(spec, rel_tol=1e-10)
    assert res.value == pytest.approx(t_tilde * math.pi * q / 2.0, rel=1e-9)


def test_classical_cross_check_agreement():
    q, t_tilde = 10.0, 0.5
    spec = IntegrandSpec(fn=lambda u: t_tilde / lorentz(u, q), peak_width=5.0 / q)
    primary = integrate_semi_infinite(spec, rel_tol=1e-10)
    other = cross_check(spec, rel_tol=1e-9)
    assert other.value == pytest.approx(primary.value, rel=1e-8)


def test_kinetic_integrand_cross_check():
    q, t_tilde, u_c = 10.0, 0.25, 1e3

    def fn(u):
        return (u ** 3 / (1.0 + (u / u_c) ** 2)) / np.tanh(u / t_tilde) / lorentz(u, q)

    spec = IntegrandSpec(fn=fn, peak_width=5.0 / q, cutoff=u_c)
    primary = integrate_semi_infinite(spec, rel_tol=1e-9)
    other = cross_check(spec, rel_tol=1e-8)
    assert other.value == pytest.approx(primary.value, rel=1e-6)


def test_separable_factor_cross_check():
    # csch^2-type factor from the thermometry derivative
    q, t_tilde = 10.0, 1.0

    def fn(u):
        x = u / t_tilde
        return u * u / t_tilde / np.sinh(np.minimum(x, 300.0)) ** 2 / lorentz(u, q)

    spec = IntegrandSpec(fn=fn, peak_width=5.0 / q)
    primary = integrate_semi_infinite(spec, rel_tol=1e-9)
    other = cross_check(spec, rel_tol=1e-8)
    assert other.value == pytest.approx(primary.value, rel=1e-6)


def test_rel_tol_range_enforced():
    spec = IntegrandSpec(fn=lambda u: 1.0 / (1.0 + u * u))
    with pytest.raises(ValueError):
        integrate_semi_infinite(spec, rel_tol=1e-3)
    with pytest.raises(ValueError):
        integrate_semi_infinite(spec, rel_tol=1e-13)


def test_tail_power_guard():
    with pytest.raises(ValueError):
        integrate_semi_infinite(IntegrandSpec(fn=lambda u: 1.0 / (1.0 + u), tail_power=1.0))


def test_panel_budget_failure(monkeypatch):
    import brosc.quadrature as qmod
    monkeypatch.setattr(qmod, "_MAX_PANELS", 3)
    spec = IntegrandSpec(fn=lambda u: 1.0 / lorentz(u, 200.0), peak_width=5.0 / 200.0)
    with pytest.raises(QuadratureError):
        integrate_semi_infinite(spec, rel_tol=1e-10)


def test_error_estimates_conservative():
    # randomized smooth integrands: reported error should cover the deviation
    # from the cross-check rule in at least 99% of trials
    rng = np.random.default_rng(7)
    bad = 0
    trials = 100
    for _ in range(trials):
        q = rng.uniform(1.0, 30.0)
        amp = rng.uniform(0.1, 3.0)
        decay = rng.uniform(0.1, 2.0)
        power = rng.uniform(1.0, 3.0)

        def fn(u, a=amp, d=decay, p=power, qq=q):
            return (a * u ** p * np.exp(-d * u) + 0.3) / lorentz(u, qq)

        spec = IntegrandSpec(fn=fn, peak_width=5.0 / q)
        primary = integrate_semi_infinite(spec, rel_tol=1e-8)
        other = cross_check(spec, rel_tol=1e-8)
        allowed = primary.abs_error + other.abs_error + 1e-8 * abs(primary.value)
        if abs(primary.value - other.value) > allowed:
            bad += 1
    assert bad <= 0.01 * trials
