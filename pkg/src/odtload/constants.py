"""Physical constants and species data.

All quantities are strict SI. Constants are fixed CODATA values and are
deliberately not configurable.
"""

from dataclasses import dataclass

# CODATA 2018
MU_0 = 1.25663706212e-6   # vacuum permeability, T*m/A
MU_B = 9.2740100783e-24   # Bohr magneton, J/T
K_B = 1.380649e-23        # Boltzmann constant, J/K
H_PLANCK = 6.62607015e-34  # Planck constant, J*s
AMU = 1.66053906660e-27   # atomic mass unit, kg


@dataclass(frozen=True)
class Species:
    """Atomic species: mass, Lande g-factor and maximal Zeeman quantum number."""

    name: str
    mass: float      # kg
    gJ: float        # dimensionless
    mJ_max: int

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("species mass must be positive")
        if self.gJ <= 0:
            raise ValueError("species gJ must be positive")

    def magnetic_moment(self, mJ: int) -> float:
        """Magnetic moment mu(mJ) = mu_B * gJ * mJ in J/T."""
        return MU_B * self.gJ * mJ


# 52Cr in the 7S3 ground state: gJ = 2, mJ_max = 3 gives the 6 mu_B moment.
CHROMIUM_52 = Species(name="52Cr", mass=51.9405062 * AMU, gJ=2.0, mJ_max=3)
