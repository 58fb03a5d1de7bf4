"""Physical constants (SI) used at the configuration and device boundaries.

Everything inside the analysis and simulation engines works in reduced units
hbar = k_B = M = Omega = 1; these constants only enter when converting an SI
configuration to reduced parameters and in the device-noise calculators.

Values are CODATA 2018 (h, c, k_B are exact by definition in the 2019 SI).
"""

import math

# Planck constant [J s] (exact)
H_PLANCK = 6.62607015e-34

# Reduced Planck constant [J s]
HBAR = H_PLANCK / (2.0 * math.pi)

# Boltzmann constant [J/K] (exact)
K_BOLTZMANN = 1.380649e-23

# Speed of light in vacuum [m/s] (exact)
C_LIGHT = 299792458.0
