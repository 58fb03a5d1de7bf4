"""Platform calculators mapping device parameters to the frequency-noise
strength D, with decibel bookkeeping over an intrinsic noise floor.

All quantities here are SI.  Each budget satisfies the identity
D = 10^((Phi + L)/10) * S_min / 4, where S_min is the intrinsic (white)
power-spectral-density floor of the fluctuating control parameter, L >= 0 dB
the excess noise level above the floor, and Phi the implementation-specific
enhancement.  ``enhancement_db`` is stored so this identity holds exactly;
for the a.c. Paul-trap component it therefore includes the +20 log10(2) of
the linear-dependence reference (the conventional label without that term is
available from :func:`paul_trap_phi`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import C_LIGHT, HBAR, H_PLANCK, K_BOLTZMANN


@dataclass(frozen=True)
class NoiseBudget:
    """Decibel bookkeeping for one multiplicative-noise implementation."""

    s_min: float            # intrinsic PSD floor [s]
    level_db: float         # L >= 0: excess noise above the floor
    enhancement_db: float   # Phi: implementation enhancement (identity-exact)
    d: float                # resulting noise strength [s]
    d_min: float            # floor at L = 0 [s]
    note: str = ""

    def __post_init__(self) -> None:
        if self.level_db < 0.0:
            raise ValueError("noise level below the intrinsic floor (L < 0 dB)")


def _budget(s_min: float, phi_db: float, level_db: float, note: str = "") -> NoiseBudget:
    d_min = 10.0 ** (phi_db / 10.0) * s_min / 4.0
    d = d_min * 10.0 ** (level_db / 10.0)
    return NoiseBudget(s_min=s_min, level_db=level_db, enhancement_db=phi_db,
                       d=d, d_min=d_min, note=note)


def level_from_psd(s: float, s_min: float) -> float:
    """L = 10 log10(S / S_min) in dB."""
    if s <= 0.0 or s_min <= 0.0:
        raise ValueError("PSD values must be positive")
    return 10.0 * math.log10(s / s_min)


def psd_from_level(level_db: float, s_min: float) -> float:
    return 10.0 ** (level_db / 10.0) * s_min


def tweezers_d(power: float, wavelength: float, level_db: float = 0.0) -> NoiseBudget:
    """Optical tweezers with laser power fluctuations.

    The shot-noise floor of relative power fluctuations gives
    S_min = 2 h c / (lambda P0) and thus D_min = h c / (2 lambda P0); the
    trap frequency is linear in power, so the enhancement is 0 dB.
    """
    if power <= 0.0 or wavelength <= 0.0:
        raise ValueError("power and wavelength must be positive")
    s_min = 2.0 * H_PLANCK * C_LIGHT / (wavelength * power)
    return _budget(s_min, 0.0, level_db,
                   note="shot-noise-limited trapping power")


def paul_trap_phi(a: float, q: float, component: str) -> float:
    """Conventional enhancement labels for the Paul-trap components:
    Phi_dc = -20 log10|1 + q^2/(2a)|, Phi_ac = -20 log10|1 + 2a/q^2|."""
    if component == "dc":
        return -20.0 * math.log10(abs(1.0 + q * q / (2.0 * a)))
    if component == "ac":
        return -20.0 * math.log10(abs(1.0 + 2.0 * a / (q * q)))
    raise ValueError("component must be 'dc' or 'ac'")


def paul_trap_d(capacitance: float, v_dc: float, a: float, q: float,
                component: str = "dc", level_db: float = 0.0) -> NoiseBudget:
    """Trapped ion in a Paul trap with voltage fluctuations (Dehmelt regime).

    Single-electron charge noise sets the voltage floor
    S_min = hbar / (C V0^2).  Modulating the d.c. component gives
    D = S / (4 [1 + q^2/2a]^2); with a = 0 the secular frequency does not
    depend on V0 and there is no multiplicative noise.  Modulating the a.c.
    component gives D = S / (1 + 2a/q^2)^2.
    """
    if capacitance <= 0.0:
        raise ValueError("capacitance must be positive")
    if v_dc == 0.0:
        raise ValueError("need a nonzero d.c. voltage to define the charge-noise floor")
    s_min = HBAR / (capacitance * v_dc * v_dc)
    if component == "dc":
        if a == 0.0:
            return NoiseBudget(s_min=s_min, level_db=level_db,
                               enhancement_db=-math.inf, d=0.0, d_min=0.0,
                               note="no multiplicative noise: secular frequency "
                                    "independent of the d.c. voltage at a = 0")
        phi = paul_trap_phi(a, q, "dc")
    elif component == "ac":
        if q == 0.0:
            raise ValueError("a.c. component requires q != 0")
        # +20 log10(2) relative to the conventional label makes the budget
        # identity D = 10^((Phi+L)/10) S_min / 4 exact for this component
        phi = paul_trap_phi(a, q, "ac") + 20.0 * math.log10(2.0)
    else:
        raise ValueError("component must be 'dc' or 'ac'")
    return _budget(s_min, phi, level_db, note=f"Paul trap, {component} voltage noise")


@dataclass(frozen=True)
class CavityBound:
    d_omega_bound: float
    suitable: bool
    note: str


def cavity_wall_bound(damping: float, omega_0: float, omega: float,
                      temperature: float, mass: float) -> CavityBound:
    """Upper bound on D Omega for a cavity mode with a thermally jiggling wall.

    Requires omega_0 >> Omega.  The white-noise window bounds
    D Omega << (1/pi^2) (k_B T / m c^2) (2 gamma / omega_0) (Omega / omega_0);
    every factor is small, so the platform is reported as unsuitable.
    """
    if min(damping, omega_0, omega, temperature, mass) <= 0.0:
        raise ValueError("all cavity parameters must be positive")
    if omega_0 <= omega:
        raise ValueError("cavity wall model requires omega_0 >> Omega")
    bound = (1.0 / math.pi ** 2) * (K_BOLTZMANN * temperature / (mass * C_LIGHT ** 2)) \
        * (2.0 * damping / omega_0) * (omega / omega_0)
    note = ("upper bound on D*Omega from the white-noise window; the product of "
            "three small factors makes a fluctuating cavity wall unsuitable as a "
            "frequency-noise source")
    if omega_0 < 10.0 * omega:
        note += " (warning: omega_0 barely exceeds Omega; bound unreliable)"
    return CavityBound(d_omega_bound=bound, suitable=False, note=note)
