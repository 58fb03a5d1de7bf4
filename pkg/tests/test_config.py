"""Configuration reduction and invariant enforcement."""

import pytest

from brosc.config import (BathConfig, BathStatistics, ConfigError, SystemConfig,
                          reduce)
from brosc.constants import HBAR, K_BOLTZMANN


def bath(damping, temperature=0.25, cutoff=1e3, stat=BathStatistics.QUANTUM):
    return BathConfig(damping=damping, temperature=temperature, cutoff=cutoff,
                      statistics=stat)


def test_reduce_two_equal_baths():
    cfg = SystemConfig(frequency=1.0, baths=(bath(1.0 / 80), bath(1.0 / 80)))
    rp = reduce(cfg)
    assert rp.q == pytest.approx(10.0)
    assert rp.u_c == pytest.approx(1e3)
    assert rp.gamma == pytest.approx((0.5, 0.5))


def test_reduce_single_bath():
    rp = reduce(SystemConfig(frequency=1.0, baths=(bath(1.0 / 40),)))
    assert rp.q == pytest.approx(10.0)
    assert rp.gamma == (1.0,)
    assert rp.n_baths == 1


def test_small_cutoff_rejected():
    cfg = SystemConfig(frequency=1.0, baths=(bath(1.0 / 40, cutoff=5.0),))
    with pytest.raises(ConfigError):
        reduce(cfg)


def test_reduced_temperature_definition():
    rp = reduce(SystemConfig(frequency=1.0, baths=(bath(1.0 / 40, temperature=0.25),)))
    assert rp.t_tilde[0] == pytest.approx(0.5)   # 2 T / Omega in reduced units
    assert rp.t0 == 0.5


def test_si_units_temperature():
    omega = 2.0e5
    temp = 1e-3   # kelvin
    cfg = SystemConfig(mass=1e-18, frequency=omega, units="SI",
                       baths=(BathConfig(damping=omega / 40, temperature=temp,
                                         cutoff=1e3 * omega),))
    rp = reduce(cfg)
    assert rp.t_tilde[0] == pytest.approx(2 * K_BOLTZMANN * temp / (HBAR * omega))
    assert rp.q == pytest.approx(10.0)


def test_qdw_from_noise_strength():
    cfg = SystemConfig(frequency=1.0, noise_strength=0.05,
                       baths=(bath(1.0 / 40),))
    assert reduce(cfg).qdw == pytest.approx(0.5)


@pytest.mark.parametrize("bad", [
    SystemConfig(mass=-1.0, baths=(bath(0.025),)),
    SystemConfig(frequency=0.0, baths=(bath(0.025),)),
    SystemConfig(noise_strength=-1e-3, baths=(bath(0.025),)),
    SystemConfig(baths=()),
    SystemConfig(baths=(bath(0.01), bath(0.01), bath(0.01))),
    SystemConfig(baths=(bath(-0.1),)),
    SystemConfig(baths=(bath(0.025, temperature=-1.0),)),
    SystemConfig(baths=(bath(0.025, temperature=0.0,
                             stat=BathStatistics.CLASSICAL_HIGH_T),)),
    SystemConfig(baths=(bath(0.0125, cutoff=1e3), bath(0.0125, cutoff=2e3))),
    SystemConfig(units="natural", baths=(bath(0.025),)),
])
def test_invalid_configs_rejected(bad):
    with pytest.raises(ConfigError):
        reduce(bad)


def test_zero_temperature_quantum_allowed():
    rp = reduce(SystemConfig(baths=(bath(0.025, temperature=0.0),)))
    assert rp.t_tilde[0] == 0.0
