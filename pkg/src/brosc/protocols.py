"""Measurement protocols: ring-down, slope regression, bath classification,
and thermometry of a target bath through an ancilla.

All "measurements" here are either simulated or user-supplied numbers.  The
protocol functions consume a measurement provider so the same orchestration
runs against the fast analytic forward model (optionally with synthetic
measurement noise) or the Langevin Monte Carlo engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .config import BathStatistics, ReducedParams
from .steady import (driven_moments, heat_currents, magnification,
                     mean_kinetic_potential, virial_ratio_derivative)
from . import simulate as sim


class FitError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# ring-down

@dataclass(frozen=True)
class RingdownFit:
    """Damped-cosine fit A exp(-2 Gamma t) cos(Omega~ t + theta0)."""

    omega_damped: float
    gamma: float
    amplitude: float
    phase: float
    residual_norm: float
    omega: float          # natural frequency sqrt(Omega~^2 + 4 Gamma^2)


def ringdown(t: np.ndarray, x: np.ndarray) -> RingdownFit:
    """Fit a free decay; needs >= 10 visible oscillations and Q > 1/2.

    Initialisation uses the log envelope of |x| extrema and the zero-crossing
    count, then a full nonlinear refinement.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(t) != len(x) or len(t) < 32:
        raise FitError("need matching t, x arrays with at least 32 samples")
    span = x.max() - x.min()
    if span <= 0.0 or span < 1e-12 * max(abs(x).max(), 1.0):
        raise FitError("flat trace: nothing to fit")

    crossings = np.count_nonzero(np.diff(np.signbit(x)))
    if crossings < 20:
        raise FitError(f"only {crossings // 2} oscillations visible; need >= 10 "
                       "(overdamped or truncated trace)")
    omega_guess = math.pi * crossings / (t[-1] - t[0])

    interior = np.arange(1, len(x) - 1)
    a = np.abs(x)
    peaks = interior[(a[interior] >= a[interior - 1]) & (a[interior] >= a[interior + 1])
                     & (a[interior] > 1e-3 * a.max())]
    if len(peaks) < 4:
        raise FitError("too few envelope extrema for initialisation")
    slope, intercept = np.polyfit(t[peaks], np.log(a[peaks]), 1)
    gamma_guess = max(-0.5 * slope, 1e-6 * omega_guess)
    amp_guess = math.exp(intercept)

    def model(params, tt):
        amp, gam, om, th = params
        return amp * np.exp(-2.0 * gam * tt) * np.cos(om * tt + th)

    def resid(params):
        return model(params, t) - x

    p0 = np.array([amp_guess, gamma_guess, omega_guess, 0.0])
    sol = least_squares(resid, p0, method="lm", max_nfev=20_000)
    if not sol.success:
        raise FitError(f"ring-down fit did not converge: {sol.message}")
    amp, gam, om, th = sol.x
    if gam <= 0.0:
        raise FitError("fitted damping is non-positive")
    if om <= 4.0 * gam:
        raise FitError("overdamped fit (Q < 1/2): ring-down not applicable")
    omega_nat = math.sqrt(om * om + 4.0 * gam * gam)
    return RingdownFit(omega_damped=float(om), gamma=float(gam),
                       amplitude=float(abs(amp)), phase=float(th),
                       residual_norm=float(np.linalg.norm(sol.fun)),
                       omega=omega_nat)


# ---------------------------------------------------------------------------
# slope regression for the virial factor

@dataclass(frozen=True)
class SlopeEstimate:
    factor_f: float
    stderr: float
    intercept: float
    intercept_stderr: float
    magnifications: tuple[float, ...]


def slope_f(magnifications, values, sigmas=None) -> SlopeEstimate:
    """Weighted linear regression of E/E0 (or the current-route equivalent)
    against the magnification W; the slope estimates the virial factor F and
    the intercept should be consistent with 1."""
    w = np.asarray(magnifications, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(w) < 3 or len(np.unique(w)) < 3:
        raise FitError("need at least 3 distinct magnification values")
    if sigmas is None:
        weights = np.ones_like(w)
    else:
        s = np.asarray(sigmas, dtype=float)
        floor = s[s > 0].min() if np.any(s > 0) else 1.0
        weights = 1.0 / np.maximum(s, floor) ** 2
    a = np.column_stack([np.ones_like(w), w])
    aw = a * weights[:, None]
    cov = np.linalg.inv(a.T @ aw)
    beta = cov @ (aw.T @ y)
    if sigmas is None:
        resid = y - a @ beta
        cov = cov * float(resid @ resid) / max(len(w) - 2, 1)
    return SlopeEstimate(factor_f=float(beta[1]),
                         stderr=float(math.sqrt(cov[1, 1])),
                         intercept=float(beta[0]),
                         intercept_stderr=float(math.sqrt(cov[0, 0])),
                         magnifications=tuple(w))


# ---------------------------------------------------------------------------
# measurement providers

class AnalyticMeasurements:
    """Forward model from the quadrature engine, with optional Gaussian
    measurement noise of relative scale ``noise_rel``."""

    def __init__(self, rp: ReducedParams, noise_rel: float = 0.0, seed: int = 0):
        self.rp = rp
        self.noise_rel = noise_rel
        self._rng = np.random.Generator(np.random.SFC64(seed))

    def _jitter(self, value: float) -> tuple[float, float]:
        if self.noise_rel == 0.0:
            return value, 0.0
        sigma = abs(value) * self.noise_rel
        return value + self._rng.normal(0.0, sigma), sigma

    def energy(self, qdw: float) -> tuple[float, float]:
        return self._jitter(driven_moments(self.rp.with_qdw(qdw)).energy)

    def heat_current(self, qdw: float, bath: int) -> tuple[float, float]:
        return self._jitter(heat_currents(self.rp.with_qdw(qdw)).j[bath])

    def ringdown_trace(self, rp: ReducedParams, n_periods: int = 40,
                       samples_per_period: int = 60, x0: float = 1.0):
        gamma = 1.0 / (4.0 * rp.q)
        omega_d = math.sqrt(max(1.0 - 4.0 * gamma * gamma, 1e-12))
        t = np.linspace(0.0, 2.0 * math.pi * n_periods, n_periods * samples_per_period)
        x = x0 * np.exp(-2.0 * gamma * t) * np.cos(omega_d * t)
        if self.noise_rel > 0.0:
            x = x + self._rng.normal(0.0, self.noise_rel * x0, len(x))
        return t, x


class SimulatedMeasurements:
    """Measurements from the Langevin Monte Carlo engine."""

    def __init__(self, rp: ReducedParams, cfg: sim.IntegratorConfig):
        self.rp = rp
        self.cfg = cfg

    def energy(self, qdw: float) -> tuple[float, float]:
        m = sim.run_ensemble(self.rp.with_qdw(qdw), self.cfg)
        value = 0.5 * (m.x2.value + m.p2.value)
        err = 0.5 * math.hypot(m.x2.stderr, m.p2.stderr)
        return value, err

    def heat_current(self, qdw: float, bath: int) -> tuple[float, float]:
        hc = sim.estimate_heat_currents(self.rp.with_qdw(qdw), self.cfg)
        e = hc.j[bath]
        return e.value, e.stderr

    def ringdown_trace(self, rp: ReducedParams, n_periods: int = 40,
                       samples_per_period: int = 60, x0: float = 1.0):
        dt = 2.0 * math.pi / samples_per_period
        dt = min(dt, 0.01)
        n = int(round(2.0 * math.pi * n_periods / dt))
        t, x, _ = sim.simulate_trajectory(rp.with_qdw(0.0), dt, n,
                                          seed=self.cfg.base_seed, x0=x0)
        return t, x


# ---------------------------------------------------------------------------
# two-bath classification protocol

@dataclass(frozen=True)
class TwoBathReport:
    omega_hat: float
    gamma1_hat: float
    gamma2_hat: float
    e0_hat: float
    slope: SlopeEstimate
    f_quantum: float
    f_classical: float
    z_quantum: float
    z_classical: float
    classification: str       # "quantum" | "classical" | "indistinguishable"
    margin: float             # separation / sigma - threshold

    def summary(self) -> str:
        lines = [
            f"ring-down: Omega = {self.omega_hat:.6f}, Gamma1 = {self.gamma1_hat:.6f}, "
            f"Gamma2 = {self.gamma2_hat:.6f}",
            f"undriven energy E0 = {self.e0_hat:.6f}",
            f"slope F = {self.slope.factor_f:.6f} +/- {self.slope.stderr:.2g} "
            f"(intercept {self.slope.intercept:.4f})",
            f"hypotheses: quantum F = {self.f_quantum:.6f} (z = {self.z_quantum:.2f}), "
            f"classical F = {self.f_classical:.6f} (z = {self.z_classical:.2f})",
            f"classification: {self.classification} (margin {self.margin:+.2f})",
        ]
        return "\n".join(lines)


_Z_THRESHOLD = 3.0


def two_bath_protocol(rp: ReducedParams, provider,
                      qdw_values=(0.15, 0.3, 0.45, 0.6, 0.75),
                      repetitions: int = 10) -> TwoBathReport:
    """Four-step procedure: two ring-downs, a D = 0 baseline, and a D sweep.

    The slope of E/E0 against the magnification estimates the virial factor,
    which is then compared against the quantum-target and classical-target
    hypotheses computed from the calibrated parameters.
    """
    if rp.n_baths != 2:
        raise ValueError("protocol requires an ancilla and a target bath")

    # (i) ring-down coupled to the ancilla only
    rp1 = ReducedParams(q=rp.q / rp.gamma[0], u_c=rp.u_c, t_tilde=(rp.t_tilde[0],),
                        gamma=(1.0,), statistics=(rp.statistics[0],), qdw=0.0)
    t, x = provider.ringdown_trace(rp1)
    fit1 = ringdown(t, x)
    gamma1_hat = fit1.gamma

    # (ii) ring-down coupled to both baths
    t, x = provider.ringdown_trace(rp.with_qdw(0.0))
    fit2 = ringdown(t, x)
    gamma2_hat = fit2.gamma - gamma1_hat

    # (iii) undriven baseline
    reps = [provider.energy(0.0) for _ in range(repetitions)]
    e0_hat = float(np.mean([r[0] for r in reps]))

    # (iv) sweep of the noise strength
    mags, ys, sigmas = [], [], []
    for qdw in qdw_values:
        mag = magnification(qdw)
        sample = [provider.energy(qdw) for _ in range(repetitions)]
        vals = np.array([s[0] for s in sample])
        mags.append(mag)
        ys.append(vals.mean() / e0_hat)
        reported = np.array([s[1] for s in sample])
        spread = vals.std(ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else 0.0
        sigmas.append(max(spread, reported.mean() / math.sqrt(len(vals)), 1e-12) / e0_hat)
    slope = slope_f(mags, ys, sigmas)

    gamma_total_hat = gamma1_hat + gamma2_hat
    q_hat = fit2.omega / (4.0 * gamma_total_hat)
    gamma_frac = gamma1_hat / gamma_total_hat
    hypotheses = {}
    for label, stat in (("quantum", BathStatistics.QUANTUM),
                        ("classical", BathStatistics.CLASSICAL_HIGH_T)):
        rp_h = ReducedParams(q=q_hat, u_c=rp.u_c, t_tilde=rp.t_tilde,
                             gamma=(gamma_frac, 1.0 - gamma_frac),
                             statistics=(rp.statistics[0], stat), qdw=0.0)
        hypotheses[label] = mean_kinetic_potential(rp_h).factor_f

    sigma = max(slope.stderr, 1e-15)
    z_q = abs(slope.factor_f - hypotheses["quantum"]) / sigma
    z_c = abs(slope.factor_f - hypotheses["classical"]) / sigma
    separation = abs(hypotheses["quantum"] - hypotheses["classical"])
    margin = separation / sigma - _Z_THRESHOLD
    if margin <= 0.0:
        label = "indistinguishable"
    else:
        label = "quantum" if z_q < z_c else "classical"
    return TwoBathReport(
        omega_hat=fit2.omega, gamma1_hat=gamma1_hat, gamma2_hat=gamma2_hat,
        e0_hat=e0_hat, slope=slope,
        f_quantum=hypotheses["quantum"], f_classical=hypotheses["classical"],
        z_quantum=z_q, z_classical=z_c, classification=label, margin=margin,
    )


# ---------------------------------------------------------------------------
# thermometry

@dataclass(frozen=True)
class SingleBathCalibration:
    """Quantities of the single-bath (ancilla-only) run at total quality factor Q.

    By the equilibrium identities these equal the two-bath equal-temperature
    values at the same Q, so they calibrate the target-bath inversion.
    The derivative is with respect to the reduced temperature T~.
    """

    q: float
    u_c: float
    t_tilde_1: float
    e0: float
    factor_f: float
    dr_dt: float


def calibrate_single_bath(q: float, u_c: float, t_tilde_1: float,
                          rel_tol: float = 1e-10) -> SingleBathCalibration:
    rp = ReducedParams(q=q, u_c=u_c, t_tilde=(t_tilde_1,), gamma=(1.0,),
                       statistics=(BathStatistics.QUANTUM,), qdw=0.0)
    eb = mean_kinetic_potential(rp, rel_tol)
    deriv = virial_ratio_derivative(q, u_c, t_tilde_1, rel_tol)
    return SingleBathCalibration(q=q, u_c=u_c, t_tilde_1=t_tilde_1,
                                 e0=eb.e0, factor_f=eb.factor_f,
                                 dr_dt=deriv.separable)


@dataclass(frozen=True)
class ThermometryResult:
    """Inferred target-bath temperature offset (reduced T~ units)."""

    delta_t_energy: float | None
    delta_t_energy_err: float | None
    delta_t_current: float | None
    delta_t_current_err: float | None
    valid: bool
    inputs: dict | None = None    # calibration and drive values used

    def combined(self) -> tuple[float, float]:
        vals = [(v, e) for v, e in ((self.delta_t_energy, self.delta_t_energy_err),
                                    (self.delta_t_current, self.delta_t_current_err))
                if v is not None]
        if not vals:
            raise ValueError("no route produced an estimate")
        if len(vals) == 1:
            return vals[0]
        (a, ea), (b, eb) = vals
        if ea > 0 and eb > 0:
            wa, wb = 1.0 / ea ** 2, 1.0 / eb ** 2
            return (wa * a + wb * b) / (wa + wb), math.sqrt(1.0 / (wa + wb))
        return 0.5 * (a + b), max(ea, eb)


def thermometry(calibration: SingleBathCalibration, gamma: float,
                magnification_w: float, e0_measured: float,
                energy: tuple[float, float] | None = None,
                current: tuple[float, float] | None = None,
                j0_measured: float = 0.0) -> ThermometryResult:
    """Invert the linearised virial response for the temperature offset.

    ``energy``/``current`` are (value, sigma) measurements taken while the
    frequency noise is applied; ``e0_measured`` (and ``j0_measured`` for the
    current route) are the same system's D = 0 baselines, so the measured
    virial factor F(T1, T2) = (E/E0 - 1)/W follows without approximation and

        DeltaT~ = (1 - F / F1) * 2 / ((1 - gamma) F1 dR/dT~).

    The linearisation validity flag trips when |DeltaT~| > 0.2 T~1.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("ancilla damping fraction must lie in (0, 1)")
    if magnification_w <= 0.0:
        raise ValueError("thermometry needs an applied frequency noise (W > 0)")
    kappa = (1.0 - gamma) * calibration.dr_dt * calibration.factor_f / 2.0
    if kappa == 0.0:
        raise ValueError("vanishing sensitivity: dR/dT~ is zero at this calibration")

    def invert(f_hat: float, f_err: float) -> tuple[float, float]:
        delta = (1.0 - f_hat / calibration.factor_f) / kappa
        err = abs(f_err / (calibration.factor_f * kappa))
        return delta, err

    dt_e = err_e = dt_j = err_j = None
    if energy is not None:
        value, sigma = energy
        f_hat = (value / e0_measured - 1.0) / magnification_w
        dt_e, err_e = invert(f_hat, sigma / (e0_measured * magnification_w))
    if current is not None:
        value, sigma = current
        four_gamma1 = gamma / calibration.q
        f_hat = (j0_measured - value) / (four_gamma1 * e0_measured * magnification_w)
        dt_j, err_j = invert(f_hat, sigma / (four_gamma1 * e0_measured * magnification_w))

    estimates = [v for v in (dt_e, dt_j) if v is not None]
    valid = all(abs(v) <= 0.2 * calibration.t_tilde_1 for v in estimates) if estimates else False
    used = {"e0_1": calibration.e0, "factor_f_1": calibration.factor_f,
            "dr_dt_1": calibration.dr_dt, "gamma": gamma,
            "magnification": magnification_w, "e0_measured": e0_measured}
    return ThermometryResult(delta_t_energy=dt_e, delta_t_energy_err=err_e,
                             delta_t_current=dt_j, delta_t_current_err=err_j,
                             valid=valid, inputs=used)
