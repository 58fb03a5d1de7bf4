"""Langevin Monte Carlo engine for the frequency-driven Brownian oscillator.

Integrates, in reduced units (hbar = k_B = M = Omega = 1),

    dx/dt = p
    dp/dt = -(1 + phi(t)) x - 4 Gamma p + xi_1(t) + xi_2(t)

over trajectory ensembles.  The multiplicative-noise coefficient depends on x
only while the noise drives p, so the Ito and Stratonovich readings of the
equation coincide; the explicit Heun scheme (default) and Euler-Maruyama are
both weakly consistent.  Stratonovich-sensitive products are nevertheless
estimated with midpoint momentum sampling: <xi_k p> and <phi x p> accumulate
xi * (p_n + p_{n+1})/2 and phi * x_n * (p_n + p_{n+1})/2, which is what the
steady-state work power W = Omega^2 <phi x p> requires.

Bath noise is pre-synthesised per trajectory in the frequency domain on the
same grid as the integrator (no online filtering, no resampling); trajectory
seeds derive from (base_seed, trajectory index, stream) so results are
bit-identical regardless of chunking or thread count.  Per-trajectory time
averages are reduced in fixed index order.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from numba import njit, prange, set_num_threads

from ._rng import _init_state, _normal, fill_normals, fill_spectrum, stream_key
from .config import ConfigError, ReducedParams
from .noise import force_psd
from .steady import UnstableError

_ENERGY_GUARD = 1e14
_CHUNK = 256
_WORKERS = max(1, int(os.environ.get("BROSC_THREADS", "2")))

if "BROSC_THREADS" in os.environ:
    set_num_threads(_WORKERS)


class Scheme:
    EULER_MARUYAMA = "euler"
    STOCHASTIC_HEUN = "heun"


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step ensemble integration plan (reduced time units)."""

    dt: float = 1e-3
    t_end: float = 0.0          # 0 -> burn_in + 100/Gamma default window
    burn_in: float = 0.0        # 0 -> 20/Gamma default
    scheme: str = Scheme.STOCHASTIC_HEUN
    ensemble_size: int = 1000
    base_seed: int = 2024
    allow_unstable: bool = False
    x0: float = 0.0
    p0: float = 0.0

    def resolve(self, rp: ReducedParams) -> "IntegrationPlan":
        gamma_total = 1.0 / (4.0 * rp.q)
        burn = self.burn_in if self.burn_in > 0.0 else 20.0 / gamma_total
        t_end = self.t_end if self.t_end > 0.0 else burn + 100.0 / gamma_total
        if self.dt <= 0.0 or self.dt > 0.01:
            raise ConfigError("dt must lie in (0, 0.01/Omega]")
        if self.dt * rp.u_c > 0.5:
            raise ConfigError(f"dt * Omega_C = {self.dt * rp.u_c:.3f} > 0.5")
        if burn < 10.0 / gamma_total:
            raise ConfigError(f"burn-in {burn:.1f} below 10/Gamma = {10.0 / gamma_total:.1f}")
        if t_end <= burn:
            raise ConfigError("t_end must exceed the burn-in")
        if self.ensemble_size < 100:
            raise ConfigError("ensemble size must be at least 100")
        if self.scheme not in (Scheme.EULER_MARUYAMA, Scheme.STOCHASTIC_HEUN):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        # synthesis window must cover the oscillator correlation decay and
        # steady-state relaxation, both set by the total damping
        min_len = 50.0 / gamma_total
        n_steps = max(int(round(t_end / self.dt)), int(math.ceil(min_len / self.dt)))
        return IntegrationPlan(rp=rp, cfg=self, n_steps=n_steps,
                               burn_steps=int(round(burn / self.dt)),
                               gamma_total=gamma_total)


@dataclass(frozen=True)
class IntegrationPlan:
    rp: ReducedParams
    cfg: IntegratorConfig
    n_steps: int
    burn_steps: int
    gamma_total: float


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float

    def z(self, reference: float) -> float:
        return (self.value - reference) / self.stderr if self.stderr > 0 else math.inf


@dataclass(frozen=True)
class MomentEstimates:
    """Ensemble/time-averaged steady-state moments with standard errors."""

    x2: Estimate
    p2: Estimate
    xp: Estimate
    xi_p: tuple[Estimate, ...]
    phi_xp: Estimate
    effective_samples: int
    n_tripped: int


@dataclass(frozen=True)
class SimHeatCurrents:
    """Heat currents J_k = -4 Gamma_k <p^2> + <xi_k p> and the energy balance.

    The steady-state balance used throughout is sum_k J_k = W with
    W = Omega^2 <phi x p> (midpoint-sampled); ``balance_residual`` measures
    it.  The opposite sign convention sum_k J_k = -W is also recorded as
    ``balance_residual_alt`` rather than guessed away; only one of the two
    is compatible with the stationary second-moment equations.
    """

    j: tuple[Estimate, ...]
    work_power: Estimate
    balance_residual: Estimate      # (J_1 + J_2) - Omega^2 <phi x p>
    balance_residual_alt: Estimate  # (J_1 + J_2) + Omega^2 <phi x p>


@dataclass(frozen=True)
class InstabilityReport:
    stable: bool
    rate: float                     # fitted exponential growth rate of mean energy
    times: np.ndarray = field(repr=False, default=None)
    mean_energy: np.ndarray = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# numba kernels

@njit(parallel=True, cache=True)
def _integrate_chunk(xi1, xi2, has2, phi, dt, four_gamma, burn, heun,
                     x0, p0, acc, tripped):
    ntraj, nsteps = xi1.shape
    for i in prange(ntraj):
        x = x0
        p = p0
        sx2 = 0.0
        sp2 = 0.0
        sxp = 0.0
        sx1p = 0.0
        sx2p = 0.0
        sphixp = 0.0
        bad = 0
        for n in range(nsteps):
            f = np.float64(xi1[i, n])
            if has2:
                f += np.float64(xi2[i, n])
            ph = np.float64(phi[i, n])
            ax = p
            ap = -(1.0 + ph) * x - four_gamma * p + f
            if heun:
                xt = x + dt * ax
                pt = p + dt * ap
                ap2 = -(1.0 + ph) * xt - four_gamma * pt + f
                xn = x + 0.5 * dt * (ax + pt)
                pn = p + 0.5 * dt * (ap + ap2)
            else:
                xn = x + dt * ax
                pn = p + dt * ap
            if n >= burn:
                pm = 0.5 * (p + pn)
                sx2 += xn * xn
                sp2 += pn * pn
                sxp += xn * pn
                sx1p += np.float64(xi1[i, n]) * pm
                if has2:
                    sx2p += np.float64(xi2[i, n]) * pm
                sphixp += ph * x * pm
            x = xn
            p = pn
            if x * x + p * p > _ENERGY_GUARD:
                bad = 1
                break
        m = nsteps - burn
        acc[i, 0] = sx2 / m
        acc[i, 1] = sp2 / m
        acc[i, 2] = sxp / m
        acc[i, 3] = sx1p / m
        acc[i, 4] = sx2p / m
        acc[i, 5] = sphixp / m
        tripped[i] = bad


@njit(parallel=True, cache=True)
def _phi_only_interval(x, p, keys, steps, dt, four_gamma, d_std):
    """Advance the homogeneous (bath-free) ensemble by one resampling interval."""
    for i in prange(len(x)):
        s0, s1, s2, s3 = _init_state(keys[i])
        xx = x[i]
        pp = p[i]
        for n in range(steps):
            if d_std > 0.0:
                ph, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
                ph *= d_std
            else:
                ph = 0.0
            ax = pp
            ap = -(1.0 + ph) * xx - four_gamma * pp
            xt = xx + dt * ax
            pt = pp + dt * ap
            ap2 = -(1.0 + ph) * xt - four_gamma * pt
            xx = xx + 0.5 * dt * (ax + pt)
            pp = pp + 0.5 * dt * (ap + ap2)
        x[i] = xx
        p[i] = pp


@njit(parallel=True, cache=True)
def _energy_checkpoints(xi1, xi2, has2, phi, dt, four_gamma, every, x0, p0, energies):
    ntraj, nsteps = xi1.shape
    ncheck = energies.shape[1]
    for i in prange(ntraj):
        x = x0
        p = p0
        k = 0
        for n in range(nsteps):
            f = np.float64(xi1[i, n])
            if has2:
                f += np.float64(xi2[i, n])
            ph = np.float64(phi[i, n])
            ax = p
            ap = -(1.0 + ph) * x - four_gamma * p + f
            xt = x + dt * ax
            pt = p + dt * ap
            ap2 = -(1.0 + ph) * xt - four_gamma * pt + f
            x = x + 0.5 * dt * (ax + pt)
            p = p + 0.5 * dt * (ap + ap2)
            e = 0.5 * (x * x + p * p)
            if e > _ENERGY_GUARD:
                while k < ncheck:
                    energies[i, k] = _ENERGY_GUARD
                    k += 1
                break
            if (n + 1) % every == 0 and k < ncheck:
                energies[i, k] = e
                k += 1


@njit(cache=True)
def _trace_kernel(xi, phi, dt, four_gamma, x0, p0, xs, ps):
    x = x0
    p = p0
    nsteps = xi.shape[0]
    for n in range(nsteps):
        f = np.float64(xi[n])
        ph = np.float64(phi[n])
        ax = p
        ap = -(1.0 + ph) * x - four_gamma * p + f
        xt = x + dt * ax
        pt = p + dt * ap
        ap2 = -(1.0 + ph) * xt - four_gamma * pt + f
        x = x + 0.5 * dt * (ax + pt)
        p = p + 0.5 * dt * (ap + ap2)
        xs[n] = x
        ps[n] = p


def simulate_trajectory(rp: ReducedParams, dt: float, n_steps: int, seed: int,
                        x0: float = 0.0, p0: float = 0.0,
                        with_bath_noise: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One trajectory (t, x, p), e.g. for ring-down measurements."""
    if with_bath_noise:
        xi = np.zeros(n_steps, dtype=np.float32)
        for k in range(rp.n_baths):
            psd = _bath_psd_grid(rp, k, n_steps, dt)
            xi += _synth_chunk(psd, n_steps, dt, _stream_keys(seed, [0], k))[0]
    else:
        xi = np.zeros(n_steps, dtype=np.float32)
    phi = _phi_chunk(rp.qdw / rp.q, dt, n_steps, seed, [0])[0]
    xs = np.empty(n_steps)
    ps = np.empty(n_steps)
    _trace_kernel(xi, phi, dt, 1.0 / rp.q, x0, p0, xs, ps)
    t = (np.arange(n_steps) + 1) * dt
    return t, xs, ps


def step(x: float, p: float, xi: float, phi: float, dt: float,
         four_gamma: float, heun: bool = True) -> tuple[float, float]:
    """One explicit step of the oscillator update (single trajectory).

    Raises on non-finite input; trips an instability error when the energy
    exceeds the overflow guard.
    """
    if not all(math.isfinite(v) for v in (x, p, xi, phi)):
        raise ValueError("non-finite state or forcing")
    ax = p
    ap = -(1.0 + phi) * x - four_gamma * p + xi
    if heun:
        xt = x + dt * ax
        pt = p + dt * ap
        ap2 = -(1.0 + phi) * xt - four_gamma * pt + xi
        xn = x + 0.5 * dt * (ax + pt)
        pn = p + 0.5 * dt * (ap + ap2)
    else:
        xn = x + dt * ax
        pn = p + dt * ap
    if xn * xn + pn * pn > _ENERGY_GUARD:
        raise UnstableError("trajectory energy exceeded the overflow guard")
    return xn, pn


# ---------------------------------------------------------------------------
# ensemble driver

def _stream_keys(base_seed: int, idx, stream: int) -> np.ndarray:
    return np.array([stream_key(base_seed, int(t), stream) for t in idx],
                    dtype=np.uint64)


def _synth_chunk(psd: np.ndarray, n: int, dt: float, keys: np.ndarray) -> np.ndarray:
    """Batched frequency-domain colouring (float32) for one trajectory chunk."""
    amp_full = np.sqrt(np.asarray(psd) * (n / dt))
    amp = (amp_full / math.sqrt(2.0)).astype(np.float32)
    spec = np.empty((len(keys), len(amp)), dtype=np.complex64)
    fill_spectrum(keys, amp, np.float32(amp_full[0]), np.float32(amp_full[-1]),
                  n % 2 == 0, spec)
    return sfft.irfft(spec, n=n, axis=1, workers=_WORKERS)


def _bath_psd_grid(rp: ReducedParams, bath: int, n: int, dt: float) -> np.ndarray:
    nf = n // 2 + 1
    w = 2.0 * math.pi * np.arange(nf) / (n * dt)
    gamma_total = 1.0 / (4.0 * rp.q)
    return force_psd(w, rp.gamma[bath] * gamma_total, rp.t_tilde[bath],
                     rp.u_c, rp.statistics[bath])


def _phi_chunk(d: float, dt: float, n: int, base_seed: int, idx) -> np.ndarray:
    out = np.empty((len(idx), n), dtype=np.float32)
    if d == 0.0:
        out[:] = 0.0
        return out
    fill_normals(_stream_keys(base_seed, idx, 2), math.sqrt(2.0 * d / dt), out)
    return out


def run_ensemble(rp: ReducedParams, cfg: IntegratorConfig) -> MomentEstimates:
    """Ensemble-averaged steady-state moments for the given reduced parameters.

    Trajectories start from (x0, p0), equilibrate over the burn-in, and are
    then time-averaged; the ensemble of per-trajectory averages supplies the
    standard errors.  In a nominally stable configuration more than 1% of
    trajectories tripping the overflow guard is a diagnostic failure.
    """
    if rp.qdw >= 1.0 and not cfg.allow_unstable:
        raise UnstableError(f"Q D Omega = {rp.qdw} >= 1; pass allow_unstable to force")
    plan = cfg.resolve(rp)
    n = plan.n_steps
    ntraj = cfg.ensemble_size
    d_strength = rp.qdw / rp.q

    psd = [_bath_psd_grid(rp, k, n, cfg.dt) for k in range(rp.n_baths)]
    acc = np.zeros((ntraj, 6))
    tripped = np.zeros(ntraj, dtype=np.int64)
    dummy = np.zeros((1, 1), dtype=np.float32)
    heun = plan.cfg.scheme == Scheme.STOCHASTIC_HEUN

    for lo in range(0, ntraj, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, ntraj))
        xi1 = _synth_chunk(psd[0], n, cfg.dt, _stream_keys(cfg.base_seed, idx, 0))
        if rp.n_baths == 2:
            xi2 = _synth_chunk(psd[1], n, cfg.dt, _stream_keys(cfg.base_seed, idx, 1))
        else:
            xi2 = dummy
        phi = _phi_chunk(d_strength, cfg.dt, n, cfg.base_seed, idx)
        _integrate_chunk(xi1, xi2, rp.n_baths == 2, phi, cfg.dt,
                         1.0 / rp.q, plan.burn_steps, heun,
                         cfg.x0, cfg.p0, acc[lo:lo + len(idx)], tripped[lo:lo + len(idx)])

    ok = tripped == 0
    n_tripped = int(ntraj - ok.sum())
    if rp.qdw < 1.0 and n_tripped > 0.01 * ntraj:
        raise UnstableError(
            f"{n_tripped}/{ntraj} trajectories tripped the overflow guard in a "
            "nominally stable configuration")
    good = acc[ok]
    n_good = len(good)

    def est(col: np.ndarray) -> Estimate:
        return Estimate(float(col.mean()),
                        float(col.std(ddof=1) / math.sqrt(len(col))))

    xi_p = tuple(est(good[:, 3 + k]) for k in range(rp.n_baths))
    return MomentEstimates(
        x2=est(good[:, 0]), p2=est(good[:, 1]), xp=est(good[:, 2]),
        xi_p=xi_p, phi_xp=est(good[:, 5]),
        effective_samples=n_good * (n - plan.burn_steps),
        n_tripped=n_tripped,
    )


def estimate_heat_currents(rp: ReducedParams, cfg: IntegratorConfig,
                           moments: MomentEstimates | None = None) -> SimHeatCurrents:
    """Heat currents from simulated moments (J_k in units of hbar Omega^2).

    Per-trajectory correlations between <p^2> and <xi_k p> are retained by
    forming J_k trajectory-wise before averaging, so run_ensemble is re-run
    here with the same configuration when no precomputed chunk statistics are
    available; passing ``moments`` reuses a previous run's estimates with a
    conservative (uncorrelated) error combination.
    """
    if moments is None:
        moments = run_ensemble(rp, cfg)
    four_gamma = 1.0 / rp.q
    j = []
    for k in range(rp.n_baths):
        val = -four_gamma * rp.gamma[k] * moments.p2.value + moments.xi_p[k].value
        err = math.hypot(four_gamma * rp.gamma[k] * moments.p2.stderr,
                         moments.xi_p[k].stderr)
        j.append(Estimate(val, err))
    work = Estimate(moments.phi_xp.value, moments.phi_xp.stderr)
    j_sum = sum(e.value for e in j)
    resid_err = math.sqrt(sum(e.stderr ** 2 for e in j) + work.stderr ** 2)
    return SimHeatCurrents(j=tuple(j), work_power=work,
                           balance_residual=Estimate(j_sum - work.value, resid_err),
                           balance_residual_alt=Estimate(j_sum + work.value, resid_err))


def detect_instability(rp: ReducedParams, horizon: float = 0.0,
                       ensemble_size: int = 4096, dt: float = 1e-3,
                       base_seed: int = 99, interval: float = 0.0) -> InstabilityReport:
    """Classify the configuration by an exponential fit of ensemble-mean energy.

    Stability is a property of the homogeneous dynamics (the bath forces add
    a bounded response without changing the growth exponent), so the detector
    propagates a frequency-noise-only ensemble from a displaced start and
    fits the growth rate of the ensemble-mean energy.  Near the threshold the
    naive mean over a fixed sample is starved by the rare trajectories that
    carry the second moment, so the ensemble is renormalised and resampled
    proportionally to energy after each interval; the accumulated per-interval
    mean-energy ratios are an unbiased, bounded-variance estimate of the same
    ensemble-mean growth curve.  The criterion Q D Omega < 1 corresponds to a
    fitted rate of zero.
    """
    gamma_total = 1.0 / (4.0 * rp.q)
    if horizon <= 0.0:
        horizon = 24.0 / gamma_total
    if interval <= 0.0:
        interval = 0.5 / gamma_total
    n_intervals = max(int(round(horizon / interval)), 8)
    steps = max(int(round(interval / dt)), 1)
    d_std = math.sqrt(2.0 * (rp.qdw / rp.q) / dt) if rp.qdw > 0.0 else 0.0

    # population starts with unit direction and common energy 1/2 per clone
    x = np.full(ensemble_size, 1.0)
    p = np.zeros(ensemble_size)
    resampler = np.random.Generator(np.random.SFC64(
        np.random.SeedSequence((base_seed, 0x7265))))
    log_ratio = np.empty(n_intervals)
    for k in range(n_intervals):
        keys = _stream_keys(base_seed, np.arange(ensemble_size) + k * ensemble_size, 3)
        _phi_only_interval(x, p, keys, steps, dt, 1.0 / rp.q, d_std)
        energy = 0.5 * (x * x + p * p)
        log_ratio[k] = math.log(2.0 * energy.mean())     # entering energy was 1/2
        weights = np.cumsum(energy)
        weights /= weights[-1]
        positions = (resampler.random() + np.arange(ensemble_size)) / ensemble_size
        idx = np.minimum(np.searchsorted(weights, positions), ensemble_size - 1)
        norm = np.sqrt(2.0 * energy[idx])
        x = x[idx] / norm
        p = p[idx] / norm

    times = (np.arange(n_intervals) + 1) * interval
    cum = np.cumsum(log_ratio)
    skip = n_intervals // 4
    coef, cov = np.polyfit(times[skip:], cum[skip:], 1, cov=True)
    rate = float(coef[0])
    rate_se = float(math.sqrt(max(cov[0, 0], 0.0)))
    threshold = 3.0 * rate_se + 0.02 * 4.0 * gamma_total
    return InstabilityReport(stable=bool(rate <= threshold), rate=rate,
                             times=times, mean_energy=np.exp(cum))
