"""brosc: frequency-noise-driven Brownian oscillator toolkit.

Analytic quadrature engine for steady-state energies, virial ratios, and heat
currents of a harmonic oscillator coupled to one or two (quantum or classical)
thermal baths and driven by white multiplicative frequency noise, cross
validated by a Langevin Monte Carlo engine, plus measurement-protocol and
thermometry runners and device noise-budget calculators.
"""

__version__ = "0.1.0"

from .config import (BathConfig, BathStatistics, ConfigError, ReducedParams,
                     SystemConfig, reduce)
from .quadrature import IntegrandSpec, QuadResult, QuadratureError, cross_check, integrate_semi_infinite
from .steady import (DrivenSteadyState, EnergyBreakdown, HeatCurrentReport,
                     UnstableError, driven_moments, heat_currents,
                     heisenberg_bound, magnification, mean_kinetic_potential,
                     virial_factor, virial_ratio, virial_ratio_derivative)
from .noise import (BathNoiseSpec, MicroBathSpec, SampledProcess, estimate_psd,
                    force_psd, microscopic_bath_force, sample_multiplicative_noise,
                    synthesize_bath_noise)
from .simulate import (IntegratorConfig, MomentEstimates, SimHeatCurrents,
                       detect_instability, estimate_heat_currents, run_ensemble,
                       simulate_trajectory, step)
from .protocols import (RingdownFit, SingleBathCalibration, SlopeEstimate,
                        ThermometryResult, calibrate_single_bath, ringdown,
                        slope_f, thermometry, two_bath_protocol)
from .devices import CavityBound, NoiseBudget, cavity_wall_bound, paul_trap_d, tweezers_d
