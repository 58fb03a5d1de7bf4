"""Discrete-time synthesis of the bath forces and the white frequency noise.

PSD convention
--------------
The bath force xi_k is a real stationary Gaussian process.  We work with the
two-sided power spectral density S(omega) defined through

    <xi(t) xi(t')> = C(t - t') = Int dw/(2 pi) S(w) exp(-i w (t - t'))

so that a discrete white sequence of per-sample variance sigma^2 has the flat
density S = sigma^2 dt.  The bath target, in reduced units (M = Omega = 1), is

    S_k(w) = 4 Gamma_k |w| f(|w|/u_C) theta_k(|w|)

with the same Lorentzian cutoff f and thermal factor theta_k used by the
steady-state integrals.  This normalisation is fixed by the requirement that
the Langevin equation with damping term 4 Gamma xdot thermalises correctly:
in the classical high-T limit S -> 8 Gamma_k k_B T_k f, whose autocovariance
is 4 M Gamma k_B T Omega_C exp(-Omega_C |tau|) (exponentially-correlated
noise with one-sided area 4 M Gamma k_B T), and equipartition follows.

Synthesis is exact frequency-domain colouring: the rFFT spectrum of white
complex Gaussians is shaped by sqrt(n S(w_j) / dt), giving a periodic
stationary Gaussian sequence whose discrete spectrum equals the target at the
grid frequencies.  The synthesis grid always matches the simulation dt.

The microscopic oracle realises the same force as an explicit sum over bath
modes (couplings discretising the spectral density J(w) = (8 M Gamma_k/pi)
w f, for which C(tau) = (1/2) Int J coth cos), providing an independent check
on the synthesised statistics.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .config import BathStatistics, ConfigError
from .steady import u_coth

_NOISE_MAGIC = b"BROSCN01"


def thermal_factor(omega: np.ndarray, t_tilde: float, statistics: BathStatistics) -> np.ndarray:
    """theta(w): coth(w/T~) for quantum baths, T~/w for classical high-T."""
    omega = np.asarray(omega, dtype=float)
    out = np.ones_like(omega)
    nz = omega > 0.0
    if statistics is BathStatistics.QUANTUM:
        if t_tilde > 0.0:
            x = omega[nz] / t_tilde
            out[nz] = 1.0 / np.tanh(np.minimum(x, 50.0))
    else:
        out[nz] = t_tilde / omega[nz]
        out[~nz] = np.inf
    return out


def force_psd(omega: np.ndarray, damping: float, t_tilde: float, u_c: float,
              statistics: BathStatistics) -> np.ndarray:
    """Two-sided bath-force PSD S(omega) in reduced units.

    The quantum kernel omega * coth(omega / T~) tends to T~ at zero frequency
    (the classical low-frequency plateau), which matters for the DC bin of
    the synthesis grid.
    """
    omega = np.abs(np.asarray(omega, dtype=float))
    cut = 1.0 / (1.0 + (omega / u_c) ** 2)
    if statistics is BathStatistics.CLASSICAL_HIGH_T:
        return 4.0 * damping * t_tilde * cut
    return 4.0 * damping * cut * u_coth(omega, t_tilde)


def force_autocovariance(tau: np.ndarray, damping: float, t_tilde: float,
                         u_c: float, statistics: BathStatistics,
                         omega_max: float, n_omega: int = 200_000) -> np.ndarray:
    """C(tau) by direct cosine transform of the PSD over [0, omega_max].

    The quantum variance diverges logarithmically with the band edge, so the
    band must be stated explicitly; pass the Nyquist frequency (synthesised
    process) or the mode-grid edge (microscopic oracle) for comparisons.
    """
    tau = np.asarray(tau, dtype=float)
    w = (np.arange(n_omega) + 0.5) * (omega_max / n_omega)
    s = force_psd(w, damping, t_tilde, u_c, statistics)
    dw = omega_max / n_omega
    return (s[None, :] * np.cos(np.outer(tau, w))).sum(axis=1) * dw / math.pi


# ---------------------------------------------------------------------------
# sampled processes

@dataclass(frozen=True)
class BathNoiseSpec:
    """Synthesis request: bath parameters, grid, and seed (reduced units)."""

    damping: float
    t_tilde: float
    u_c: float
    statistics: BathStatistics
    dt: float
    n_samples: int
    seed: int

    def validate(self) -> None:
        if self.damping <= 0.0:
            raise ConfigError("bath damping must be positive")
        if self.dt <= 0.0 or self.n_samples < 2:
            raise ConfigError("need dt > 0 and n_samples >= 2")
        if self.dt * self.u_c > 0.5:
            raise ConfigError(
                f"dt * Omega_C = {self.dt * self.u_c:.3f} > 0.5: grid cannot resolve the cutoff")
        if self.n_samples * self.dt < 50.0 / self.damping:
            raise ConfigError(
                f"n_samples * dt = {self.n_samples * self.dt:.1f} shorter than "
                f"50/Gamma = {50.0 / self.damping:.1f}")

    def content_hash(self) -> bytes:
        text = (f"{self.damping!r}|{self.t_tilde!r}|{self.u_c!r}|"
                f"{self.statistics.value}|{self.dt!r}|{self.n_samples}|{self.seed}")
        return hashlib.sha256(text.encode()).digest()


@dataclass(frozen=True)
class SampledProcess:
    dt: float
    samples: np.ndarray
    generator_id: str
    seed: int


def _entropy(seed_key) -> tuple[int, ...]:
    if not isinstance(seed_key, tuple):
        seed_key = (seed_key,)
    out = []
    for part in seed_key:
        if isinstance(part, str):
            digest = hashlib.sha256(part.encode()).digest()
            out.append(int.from_bytes(digest[:8], "little"))
        else:
            out.append(int(part) & (2 ** 64 - 1))
    return tuple(out)


def _rng(seed_key) -> np.random.Generator:
    return np.random.Generator(np.random.SFC64(np.random.SeedSequence(_entropy(seed_key))))


def colored_noise_from_psd(psd_fn, n: int, dt: float, rng: np.random.Generator,
                           dtype=np.float64) -> np.ndarray:
    """One realisation of a stationary Gaussian sequence with two-sided PSD psd_fn.

    Frequency-domain colouring: x = irfft(zeta) with E|zeta_j|^2 = n S(w_j)/dt.
    """
    nf = n // 2 + 1
    w = 2.0 * math.pi * np.arange(nf) / (n * dt)
    s = np.asarray(psd_fn(w), dtype=float)
    if np.any(s < 0.0) or not np.all(np.isfinite(s)):
        raise ValueError(
            "PSD must be finite and non-negative on the synthesis grid "
            f"(minimum value {np.nanmin(s):g}): no Gaussian process exists")
    amp = np.sqrt(s * (n / dt))
    z = rng.standard_normal(2 * nf, dtype=np.float32).astype(np.float64)
    spec = amp / math.sqrt(2.0) * (z[:nf] + 1j * z[nf:])
    spec[0] = amp[0] * z[0]
    if n % 2 == 0:
        spec[-1] = amp[-1] * z[nf - 1]
    return sfft.irfft(spec, n=n).astype(dtype)


def colored_noise_batch(psd: np.ndarray, n: int, dt: float, seed_keys,
                        workers: int = 2) -> np.ndarray:
    """Independent realisations (one per seed key) of a coloured sequence.

    Same spectral colouring as :func:`colored_noise_from_psd`, batched in
    float32 for the simulation engine; ``psd`` holds S(w_j) on the rfft grid.
    """
    nf = n // 2 + 1
    if len(psd) != nf:
        raise ValueError("psd must be sampled on the rfft grid (n//2 + 1 bins)")
    amp = (np.sqrt(np.asarray(psd) * (n / dt)) / math.sqrt(2.0)).astype(np.float32)
    amp_edge = amp * np.float32(math.sqrt(2.0))
    spec = np.empty((len(seed_keys), nf), dtype=np.complex64)
    for row, key in enumerate(seed_keys):
        z = _rng(key).standard_normal(2 * nf, dtype=np.float32)
        spec[row] = amp * z[:nf] + 1j * (amp * z[nf:])
        spec[row, 0] = amp_edge[0] * z[0]
        if n % 2 == 0:
            spec[row, -1] = amp_edge[-1] * z[nf - 1]
    return sfft.irfft(spec, n=n, axis=1, workers=workers)


def synthesize_bath_noise(spec: BathNoiseSpec) -> SampledProcess:
    """Generate one realisation of the bath force xi_k on the simulation grid."""
    spec.validate()
    rng = _rng(("brosc-bath", spec.seed))
    samples = colored_noise_from_psd(
        lambda w: force_psd(w, spec.damping, spec.t_tilde, spec.u_c, spec.statistics),
        spec.n_samples, spec.dt, rng)
    return SampledProcess(dt=spec.dt, samples=samples,
                          generator_id="spectral-synthesis", seed=spec.seed)


def sample_multiplicative_noise(d: float, dt: float, n: int, seed: int) -> SampledProcess:
    """White frequency noise phi: iid Gaussians with per-step variance 2 D / dt."""
    if d < 0.0:
        raise ValueError("noise strength D must be >= 0")
    rng = _rng(("brosc-phi", seed))
    if d == 0.0:
        samples = np.zeros(n)
    else:
        samples = rng.standard_normal(n) * math.sqrt(2.0 * d / dt)
    return SampledProcess(dt=dt, samples=samples, generator_id="white", seed=seed)


# ---------------------------------------------------------------------------
# averaged-periodogram PSD estimate

@dataclass(frozen=True)
class PsdEstimate:
    omega: np.ndarray
    psd: np.ndarray
    band: np.ndarray       # one-sigma band from segment-to-segment variance
    n_segments: int


def estimate_psd(proc: SampledProcess, n_segments: int) -> PsdEstimate:
    """Two-sided PSD estimate by averaging non-overlapping periodograms."""
    if n_segments < 8:
        raise ValueError("need at least 8 segments for a usable average")
    n = len(proc.samples)
    seg_len = n // n_segments
    if seg_len < 16:
        raise ValueError("sequence too short for the requested segment count")
    segs = proc.samples[: n_segments * seg_len].reshape(n_segments, seg_len)
    spec = sfft.rfft(segs, axis=1)
    # |X|^2 * dt / m estimates the two-sided PSD (flat sigma^2 dt for white input)
    pxx = (np.abs(spec) ** 2) * (proc.dt / seg_len)
    omega = 2.0 * math.pi * np.arange(seg_len // 2 + 1) / (seg_len * proc.dt)
    mean = pxx.mean(axis=0)
    band = pxx.std(axis=0, ddof=1) / math.sqrt(n_segments)
    return PsdEstimate(omega=omega, psd=mean, band=band, n_segments=n_segments)


# ---------------------------------------------------------------------------
# microscopic bath oracle (explicit mode sum)

@dataclass(frozen=True)
class MicroBathSpec:
    """Explicit-mode realisation of one bath on a uniform frequency grid."""

    damping: float
    t_tilde: float
    u_c: float
    n_modes: int
    omega_max: float
    initial_conditions: str = "wigner"   # "wigner" | "classical"

    def validate(self) -> None:
        if self.n_modes < 1:
            raise ConfigError("need at least one mode")
        if self.omega_max <= 0.0:
            raise ConfigError("omega_max must be positive")
        if self.initial_conditions not in ("wigner", "classical"):
            raise ConfigError("initial_conditions must be 'wigner' or 'classical'")

    def mode_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Mode frequencies and squared couplings lambda_n^2 (unit masses).

        lambda_n^2 = J(w_n) w_n dw discretises the spectral density
        J(w) = (8 Gamma / pi) w f(w/u_C), for which the symmetrised force
        autocovariance is (1/2) Int J(w) theta(w) cos(w tau) dw.
        """
        dw = self.omega_max / self.n_modes
        w = (np.arange(self.n_modes) + 0.5) * dw
        j = spectral_density(w, self.damping, self.u_c)
        return w, j * w * dw

    def recurrence_time(self) -> float:
        return 2.0 * math.pi / (self.omega_max / self.n_modes)


def spectral_density(omega: np.ndarray, damping: float, u_c: float) -> np.ndarray:
    """Bath spectral density J(w) = (8 Gamma / pi) w f(w/u_C) (reduced units).

    Normalised so the mode-sum force reproduces the synthesis target:
    S(w) = (pi/2) J(|w|) theta(|w|).
    """
    omega = np.asarray(omega, dtype=float)
    return (8.0 * damping / math.pi) * omega / (1.0 + (omega / u_c) ** 2)


def microscopic_bath_force(spec: MicroBathSpec, seed: int, times: np.ndarray,
                           n_realizations: int = 1) -> np.ndarray:
    """Free-evolution force xi(t) = sum_n lambda_n q_n(t) from sampled modes.

    Returns an (n_realizations, len(times)) array.  Mode amplitudes are drawn
    from the Wigner thermal distribution (var q = coth(w/T~)/(2 w)) or its
    classical limit (var q = T~/(2 w^2), i.e. k_B T / w^2).
    """
    spec.validate()
    if times.max() - times.min() > spec.recurrence_time():
        raise ConfigError("requested window exceeds the mode-grid recurrence time")
    w, lam2 = spec.mode_grid()
    lam = np.sqrt(lam2)
    if spec.initial_conditions == "wigner":
        var_q = thermal_factor(w, spec.t_tilde, BathStatistics.QUANTUM) / (2.0 * w)
    else:
        var_q = spec.t_tilde / (2.0 * w * w)
    var_p = var_q * w * w
    rng = _rng(("brosc-micro", seed))
    q0 = rng.standard_normal((n_realizations, spec.n_modes)) * np.sqrt(var_q)
    p0 = rng.standard_normal((n_realizations, spec.n_modes)) * np.sqrt(var_p)
    cos_t = np.cos(np.outer(times, w))
    sin_t = np.sin(np.outer(times, w))
    return (q0 * lam) @ cos_t.T + ((p0 / w) * lam) @ sin_t.T


# ---------------------------------------------------------------------------
# binary dump format: magic, dt (f64), n (u64), seed (u64), 32-byte spec hash,
# then n little-endian float64 samples

def write_process(path, proc: SampledProcess, spec_hash: bytes = b"\0" * 32) -> None:
    if len(spec_hash) != 32:
        raise ValueError("spec hash must be 32 bytes")
    data = np.ascontiguousarray(proc.samples, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_NOISE_MAGIC)
        fh.write(struct.pack("<dQQ", proc.dt, len(data), proc.seed & (2 ** 64 - 1)))
        fh.write(spec_hash)
        fh.write(data.tobytes())


def read_process(path) -> tuple[SampledProcess, bytes]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _NOISE_MAGIC:
            raise ValueError(f"not a brosc noise dump (magic {magic!r})")
        dt, n, seed = struct.unpack("<dQQ", fh.read(24))
        spec_hash = fh.read(32)
        data = np.frombuffer(fh.read(8 * n), dtype="<f8")
        if len(data) != n:
            raise ValueError("truncated noise dump")
    proc = SampledProcess(dt=dt, samples=data.copy(), generator_id="file", seed=seed)
    return proc, spec_hash
