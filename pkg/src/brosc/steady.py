"""Closed-form steady-state quantities of the frequency-driven Brownian oscillator.

All results are produced in reduced units hbar = k_B = M = Omega = 1.  The
central objects are the per-bath spectral integrals

    I_V = (1/pi) Int_0^inf  u theta_k(u) / L(u) du
    I_K = (1/pi) Int_0^inf  u^3 f(u/u_C) theta_k(u) / L(u) du

with L(u) = (1-u^2)^2 + u^2/Q^2, Lorentzian cutoff f(x) = 1/(1+x^2) and
thermal factor theta_k(u) = coth(u/T~_k) (quantum) or T~_k/u (classical
high-T).  The potential-energy integrand needs no cutoff; only the kinetic
one does, and its value grows logarithmically with u_C.

Every other quantity is arithmetic on (I_V, I_K):

    <V> = sum_k gamma_k I_V^k / (2Q)         <K> = sum_k gamma_k I_K^k / (2Q)
    Dc^k = gamma_k (I_V^k + I_K^k) / (2Q)    Ds^k = gamma_k (I_V^k - I_K^k) / (2Q)
    <x^2> = (Dc + Ds) / (1 - w)              <p^2> = (Dc + (2w-1) Ds) / (1 - w)
    <xi_k p> = 4 Gamma (Dc^k - Ds^k)         J_k = -4 Gamma_k <p^2> + <xi_k p>

with w = Q D Omega.  These identities make E = E0 (1 + W F) and
J_1 + J_2 = -4 Gamma E0 W F exact (not merely approximate) in this module.

The noise normalisation is fixed so that the classical high-T limit obeys
equipartition (<K> = <V> = k_B T / 2) and the weak-coupling quantum limit
gives <K> = <V> = (Omega/4) coth(1/T~) under the damping term 4 Gamma xdot;
the simulation engine synthesises its bath forces with the matching spectrum.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .config import BathStatistics, ReducedParams
from .quadrature import IntegrandSpec, integrate_semi_infinite


class UnstableError(ValueError):
    """Requested a steady-state quantity outside the stability region Q D Omega < 1."""


# ---------------------------------------------------------------------------
# stable thermal-factor kernels (vectorised over u)

def u_coth(u: np.ndarray, t_tilde: float) -> np.ndarray:
    """u * coth(u / T~), finite at u -> 0 where it tends to T~."""
    u = np.asarray(u, dtype=float)
    if t_tilde == 0.0:
        return u.copy()
    x = u / t_tilde
    out = np.empty_like(u)
    small = x < 1e-4
    large = x > 20.0
    mid = ~(small | large)
    out[small] = t_tilde * (1.0 + x[small] ** 2 / 3.0)
    out[large] = u[large]
    out[mid] = u[mid] / np.tanh(x[mid])
    return out


def u2_csch2_over_t(u: np.ndarray, t_tilde: float) -> np.ndarray:
    """(u^2 / T~) csch^2(u / T~), finite at u -> 0 where it tends to T~."""
    u = np.asarray(u, dtype=float)
    x = u / t_tilde
    out = np.zeros_like(u)
    small = x < 1e-4
    large = x > 300.0
    mid = ~(small | large)
    out[small] = t_tilde * (1.0 - x[small] ** 2 / 3.0)
    e = np.exp(-x[mid])
    out[mid] = (u[mid] ** 2 / t_tilde) * (2.0 * e / (1.0 - e * e)) ** 2
    return out


def _lorentz_denominator(u: np.ndarray, q: float) -> np.ndarray:
    return (1.0 - u * u) ** 2 + (u / q) ** 2


def _cutoff(u: np.ndarray, u_c: float) -> np.ndarray:
    return 1.0 / (1.0 + (u / u_c) ** 2)


# ---------------------------------------------------------------------------
# per-bath integrals

@dataclass(frozen=True)
class BathIntegrals:
    """(I_V, I_K) for one bath, with quadrature error bounds."""

    i_v: float
    i_k: float
    i_v_err: float
    i_k_err: float


def _spec(fn, q: float, u_c: float, kinetic: bool) -> IntegrandSpec:
    return IntegrandSpec(fn=fn, peak_width=5.0 / q,
                         cutoff=u_c if kinetic else 1.0, tail_power=3.0)


@functools.lru_cache(maxsize=100_000)
def bath_integrals(q: float, u_c: float, t_tilde: float,
                   statistics: BathStatistics,
                   rel_tol: float = 1e-10) -> BathIntegrals:
    """I_V and I_K for a single bath at quality factor Q and cutoff u_C."""
    if statistics is BathStatistics.QUANTUM:
        def fv(u):
            return u_coth(u, t_tilde) / _lorentz_denominator(u, q)

        def fk(u):
            return u * u * _cutoff(u, u_c) * u_coth(u, t_tilde) / _lorentz_denominator(u, q)
    else:
        def fv(u):
            return t_tilde / _lorentz_denominator(u, q)

        def fk(u):
            return t_tilde * u * u * _cutoff(u, u_c) / _lorentz_denominator(u, q)

    rv = integrate_semi_infinite(_spec(fv, q, u_c, kinetic=False), rel_tol)
    rk = integrate_semi_infinite(_spec(fk, q, u_c, kinetic=True), rel_tol)
    return BathIntegrals(i_v=rv.value / math.pi, i_k=rk.value / math.pi,
                         i_v_err=rv.abs_error / math.pi,
                         i_k_err=rk.abs_error / math.pi)


def _derivative_integrals(q: float, u_c: float, t_tilde: float,
                          rel_tol: float = 1e-10) -> tuple[float, float]:
    """B_V, B_K: the csch^2 companions of I_V, I_K (quantum baths only)."""
    def bv(u):
        return u2_csch2_over_t(u, t_tilde) / _lorentz_denominator(u, q)

    def bk(u):
        return u * u * _cutoff(u, u_c) * u2_csch2_over_t(u, t_tilde) / _lorentz_denominator(u, q)

    rv = integrate_semi_infinite(_spec(bv, q, u_c, kinetic=False), rel_tol)
    rk = integrate_semi_infinite(_spec(bk, q, u_c, kinetic=True), rel_tol)
    return rv.value / math.pi, rk.value / math.pi


def _per_bath(rp: ReducedParams, rel_tol: float) -> list[BathIntegrals]:
    return [bath_integrals(rp.q, rp.u_c, tt, st, rel_tol)
            for tt, st in zip(rp.t_tilde, rp.statistics)]


# ---------------------------------------------------------------------------
# energies and virial quantities

@dataclass(frozen=True)
class EnergyBreakdown:
    """Undriven (D = 0) steady-state energies in units of hbar Omega."""

    mean_k: float
    mean_v: float
    e0: float
    ratio_r: float
    factor_f: float
    heisenberg_rh: float
    mean_k_err: float
    mean_v_err: float
    ratio_r_err: float


def magnification(qdw: float) -> float:
    """Amplification factor W = qdw / (1 - qdw); unstable for qdw >= 1."""
    if qdw < 0.0:
        raise ValueError(f"qdw must be >= 0, got {qdw}")
    if qdw >= 1.0:
        raise UnstableError(f"Q D Omega = {qdw} >= 1: no stable steady state")
    return qdw / (1.0 - qdw)


def is_stable(qdw: float) -> bool:
    return 0.0 <= qdw < 1.0


def heisenberg_bound(mean_v: float, omega: float = 1.0) -> float:
    """Lower bound on the virial ratio, Omega^2 / (16 <V>^2)."""
    if mean_v <= 0.0:
        raise ValueError("mean potential energy must be positive")
    return omega ** 2 / (16.0 * mean_v ** 2)


def virial_ratio(mean_k: float, mean_v: float) -> float:
    return mean_k / mean_v


def virial_factor(ratio_r: float) -> float:
    return 2.0 / (1.0 + ratio_r)


def mean_kinetic_potential(rp: ReducedParams, rel_tol: float = 1e-10) -> EnergyBreakdown:
    """<K>, <V> of the undriven oscillator plus virial ratio, factor, and bound."""
    per = _per_bath(rp, rel_tol)
    w = 1.0 / (2.0 * rp.q)
    mean_v = w * sum(g * b.i_v for g, b in zip(rp.gamma, per))
    mean_k = w * sum(g * b.i_k for g, b in zip(rp.gamma, per))
    v_err = w * sum(g * b.i_v_err for g, b in zip(rp.gamma, per))
    k_err = w * sum(g * b.i_k_err for g, b in zip(rp.gamma, per))
    ratio = mean_k / mean_v
    ratio_err = ratio * (k_err / mean_k + v_err / mean_v)
    return EnergyBreakdown(
        mean_k=mean_k, mean_v=mean_v, e0=mean_k + mean_v,
        ratio_r=ratio, factor_f=virial_factor(ratio),
        heisenberg_rh=heisenberg_bound(mean_v),
        mean_k_err=k_err, mean_v_err=v_err, ratio_r_err=ratio_err,
    )


# ---------------------------------------------------------------------------
# driven steady state and heat currents

@dataclass(frozen=True)
class DrivenSteadyState:
    """Second moments and energy of the driven (D >= 0) steady state."""

    x2: float
    p2: float
    xp: float          # exactly zero in the long-time limit; asserted, not computed
    energy: float
    magnification: float
    stable: bool
    d_c: tuple[float, ...]
    d_s: tuple[float, ...]


@dataclass(frozen=True)
class HeatCurrentReport:
    """Per-bath heat currents in units of hbar Omega^2 (positive into the oscillator)."""

    j0: tuple[float, ...]
    j: tuple[float, ...]
    work_power: float
    j0_sum_residual: float
    sum_rule_residual: float


def driven_moments(rp: ReducedParams, rel_tol: float = 1e-10) -> DrivenSteadyState:
    """<x^2>, <p^2>, <xp> and E of the driven steady state (requires qdw < 1)."""
    mag = magnification(rp.qdw)
    per = _per_bath(rp, rel_tol)
    w2q = 1.0 / (2.0 * rp.q)
    d_c = tuple(w2q * g * (b.i_v + b.i_k) for g, b in zip(rp.gamma, per))
    d_s = tuple(w2q * g * (b.i_v - b.i_k) for g, b in zip(rp.gamma, per))
    dc = sum(d_c)
    ds = sum(d_s)
    one_m = 1.0 - rp.qdw
    x2 = (dc + ds) / one_m
    p2 = (dc + (2.0 * rp.qdw - 1.0) * ds) / one_m
    energy = (dc + rp.qdw * ds) / one_m
    return DrivenSteadyState(x2=x2, p2=p2, xp=0.0, energy=energy,
                             magnification=mag, stable=True, d_c=d_c, d_s=d_s)


def heat_currents(rp: ReducedParams, rel_tol: float = 1e-10) -> HeatCurrentReport:
    """Steady-state heat currents J_k = J_k^0 - 4 Gamma_k E0 W F.

    For a single-bath configuration the report holds that bath's current only.
    The sum rule -(J_1 + J_2) / (4 Gamma E0) = W F and the zero-noise balance
    J_1^0 + J_2^0 = 0 are reported as residuals.
    """
    dss = driven_moments(rp, rel_tol)
    eb = mean_kinetic_potential(rp, rel_tol)
    four_gamma = 1.0 / rp.q                       # 4 Gamma in reduced units
    xi_p = [four_gamma * (c - s) for c, s in zip(dss.d_c, dss.d_s)]
    dc_tot = sum(dss.d_c)
    ds_tot = sum(dss.d_s)
    p2_0 = dc_tot - ds_tot
    j0 = tuple(-four_gamma * g * p2_0 + xp for g, xp in zip(rp.gamma, xi_p))
    j = tuple(-four_gamma * g * dss.p2 + xp for g, xp in zip(rp.gamma, xi_p))
    work = -four_gamma * eb.e0 * dss.magnification * eb.factor_f
    return HeatCurrentReport(
        j0=j0, j=j, work_power=work,
        j0_sum_residual=sum(j0),
        sum_rule_residual=sum(j) - work,
    )


# ---------------------------------------------------------------------------
# temperature derivative of the virial ratio (thermometry building block)

@dataclass(frozen=True)
class VirialDerivative:
    """dR/dT~ for a single quantum bath, by two independent methods."""

    separable: float
    finite_difference: float

    @property
    def spread(self) -> float:
        return abs(self.separable - self.finite_difference)


def virial_ratio_derivative(q: float, u_c: float, t_tilde: float,
                            rel_tol: float = 1e-10,
                            fd_step: float = 2e-3) -> VirialDerivative:
    """dR/dT~ of the single quantum bath ratio, separable quadrature vs FD.

    The separable route evaluates four 1-D integrals; the double-integral
    representation factorises exactly into (I_V B_K - I_K B_V) / (T~ I_V^2).
    The finite-difference route recomputes R at T~ (1 +/- h).
    """
    if t_tilde <= 0.0:
        raise ValueError("derivative requires t_tilde > 0")
    if t_tilde * fd_step < 1e-12:
        raise ValueError("finite-difference step underflow at this t_tilde")
    b = bath_integrals(q, u_c, t_tilde, BathStatistics.QUANTUM, rel_tol)
    bv, bk = _derivative_integrals(q, u_c, t_tilde, rel_tol)
    separable = (b.i_v * bk - b.i_k * bv) / (t_tilde * b.i_v ** 2)

    hi = bath_integrals(q, u_c, t_tilde * (1.0 + fd_step), BathStatistics.QUANTUM, rel_tol)
    lo = bath_integrals(q, u_c, t_tilde * (1.0 - fd_step), BathStatistics.QUANTUM, rel_tol)
    fd = (hi.i_k / hi.i_v - lo.i_k / lo.i_v) / (2.0 * fd_step * t_tilde)
    return VirialDerivative(separable=separable, finite_difference=fd)


def two_bath_ratio_derivative(rp: ReducedParams, rel_tol: float = 1e-10) -> float:
    """d/d(DeltaT~) of the two-bath virial ratio at thermal equilibrium.

    Computed from the two-bath separable structure directly; equals
    (1 - gamma) times the single-bath derivative at the common temperature.
    Bath 1 is the ancilla (fraction gamma), bath 2 the target whose
    temperature is varied.
    """
    if rp.n_baths != 2:
        raise ValueError("two-bath derivative requires two baths")
    if rp.statistics[1] is not BathStatistics.QUANTUM:
        raise ValueError("target-bath derivative defined for a quantum target")
    if abs(rp.t_tilde[0] - rp.t_tilde[1]) > 1e-12 * max(rp.t_tilde[0], 1.0):
        raise ValueError("equilibrium derivative requires T1 = T2")
    t_tilde = rp.t_tilde[0]
    per = _per_bath(rp, rel_tol)
    i_v = sum(g * b.i_v for g, b in zip(rp.gamma, per))
    i_k = sum(g * b.i_k for g, b in zip(rp.gamma, per))
    bv, bk = _derivative_integrals(rp.q, rp.u_c, t_tilde, rel_tol)
    g2 = rp.gamma[1]
    return g2 * (i_v * bk - i_k * bv) / (t_tilde * i_v ** 2)
