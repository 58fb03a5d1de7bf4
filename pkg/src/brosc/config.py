"""System and bath configuration types and their reduction to dimensionless form.

A :class:`SystemConfig` describes the oscillator (mass M, natural frequency
Omega, frequency-noise strength D) and one or two thermal baths.  Configs can
be given either in SI units (kg, rad/s, K, s) or directly in reduced units
(hbar = k_B = M = Omega = 1).  All engines consume only the dimensionless
:class:`ReducedParams` produced by :func:`reduce`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .constants import HBAR, K_BOLTZMANN

# Large-cutoff validity floor: the Markovian damping approximation and the
# closed-form steady-state integrals assume Omega_C well above the resonance.
MIN_CUTOFF_RATIO = 10.0


class BathStatistics(enum.Enum):
    """Statistics of the bath force spectrum.

    QUANTUM keeps the full coth(omega / 2 k_B T) thermal factor (zero-point
    plus Bose-Einstein); CLASSICAL_HIGH_T replaces it by its high-temperature
    limit 2 k_B T / omega while retaining the same Lorentzian cutoff.
    """

    QUANTUM = "quantum"
    CLASSICAL_HIGH_T = "classical"


class ConfigError(ValueError):
    """Raised when a configuration violates a physical invariant."""


@dataclass(frozen=True)
class BathConfig:
    """One Ohmic bath: damping Gamma_k, temperature T_k, cutoff Omega_C."""

    damping: float
    temperature: float
    cutoff: float
    statistics: BathStatistics = BathStatistics.QUANTUM

    def validate(self, frequency: float) -> None:
        if not (self.damping > 0.0 and math.isfinite(self.damping)):
            raise ConfigError(f"bath damping must be > 0, got {self.damping}")
        if self.temperature < 0.0 or not math.isfinite(self.temperature):
            raise ConfigError(f"bath temperature must be >= 0, got {self.temperature}")
        if self.statistics is BathStatistics.CLASSICAL_HIGH_T and self.temperature <= 0.0:
            raise ConfigError("classical high-T bath requires temperature > 0")
        if self.cutoff <= MIN_CUTOFF_RATIO * frequency:
            raise ConfigError(
                f"bath cutoff {self.cutoff} must exceed {MIN_CUTOFF_RATIO}x the "
                f"oscillator frequency {frequency} (large-cutoff regime)"
            )


@dataclass(frozen=True)
class SystemConfig:
    """Oscillator plus one or two baths.

    ``units`` selects how the numbers are interpreted: "reduced" means
    hbar = k_B = M = Omega = 1 is implied (temperatures are energies in units
    of Omega), "SI" means kg / rad/s / K / s.
    """

    mass: float = 1.0
    frequency: float = 1.0
    noise_strength: float = 0.0
    baths: tuple[BathConfig, ...] = field(default_factory=tuple)
    units: str = "reduced"

    def __post_init__(self) -> None:
        object.__setattr__(self, "baths", tuple(self.baths))

    def validate(self) -> None:
        if not (self.mass > 0.0 and math.isfinite(self.mass)):
            raise ConfigError(f"mass must be > 0, got {self.mass}")
        if not (self.frequency > 0.0 and math.isfinite(self.frequency)):
            raise ConfigError(f"frequency must be > 0, got {self.frequency}")
        if self.noise_strength < 0.0 or not math.isfinite(self.noise_strength):
            raise ConfigError(f"noise strength must be >= 0, got {self.noise_strength}")
        if not 1 <= len(self.baths) <= 2:
            raise ConfigError(f"need 1 or 2 baths, got {len(self.baths)}")
        if self.units not in ("reduced", "SI"):
            raise ConfigError(f"units must be 'reduced' or 'SI', got {self.units!r}")
        for bath in self.baths:
            bath.validate(self.frequency)
        cutoffs = {bath.cutoff for bath in self.baths}
        if len(cutoffs) > 1:
            raise ConfigError("all baths must share a single cutoff frequency")


@dataclass(frozen=True)
class ReducedParams:
    """Dimensionless parameters every closed-form quantity is evaluated in.

    q        quality factor Omega / (4 Gamma), Gamma = sum of bath dampings
    u_c      cutoff ratio Omega_C / Omega (> 10 enforced)
    t_tilde  per-bath 2 k_B T_k / (hbar Omega)
    gamma    per-bath damping fractions Gamma_k / Gamma (sum to 1)
    qdw      stability parameter Q * D * Omega (stable steady state iff < 1)
    """

    q: float
    u_c: float
    t_tilde: tuple[float, ...]
    gamma: tuple[float, ...]
    statistics: tuple[BathStatistics, ...]
    qdw: float

    @property
    def n_baths(self) -> int:
        return len(self.gamma)

    @property
    def t0(self) -> float:
        """Zero-point reference temperature Omega / (2 k_B) in reduced units."""
        return 0.5

    def with_qdw(self, qdw: float) -> "ReducedParams":
        return ReducedParams(self.q, self.u_c, self.t_tilde, self.gamma,
                             self.statistics, qdw)


def reduce(cfg: SystemConfig) -> ReducedParams:
    """Map a validated SystemConfig to dimensionless ReducedParams."""
    cfg.validate()
    omega = cfg.frequency
    gamma_total = sum(b.damping for b in cfg.baths)
    q = omega / (4.0 * gamma_total)
    u_c = cfg.baths[0].cutoff / omega
    if cfg.units == "SI":
        thermal = tuple(2.0 * K_BOLTZMANN * b.temperature / (HBAR * omega) for b in cfg.baths)
    else:
        thermal = tuple(2.0 * b.temperature / omega for b in cfg.baths)
    fractions = tuple(b.damping / gamma_total for b in cfg.baths)
    stats = tuple(b.statistics for b in cfg.baths)
    qdw = q * cfg.noise_strength * omega
    return ReducedParams(q=q, u_c=u_c, t_tilde=thermal, gamma=fractions,
                         statistics=stats, qdw=qdw)
