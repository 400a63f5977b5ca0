"""Physical constants (2019 SI exact values where defined)."""

import math

H = 6.62607015e-34            # Planck constant [J s]
HBAR = H / (2.0 * math.pi)    # reduced Planck constant [J s]
E_CHARGE = 1.602176634e-19    # elementary charge [C]
K_B = 1.380649e-23            # Boltzmann constant [J/K]

PHI0 = 2.067833848e-15        # magnetic flux quantum h/2e [Wb]
R_Q = H / (4.0 * E_CHARGE**2)  # superconducting resistance quantum h/4e^2 [Ohm]
