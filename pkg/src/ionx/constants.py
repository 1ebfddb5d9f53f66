"""Physical constants shared by every module (SI units)."""

FARADAY = 96485.33212           # C / mol
GAS_CONSTANT = 8.31446          # J / (mol K)
BOLTZMANN = 1.380649e-23        # J / K
ELEMENTARY_CHARGE = 1.602176634e-19  # C
AVOGADRO = 6.02214076e23        # 1 / mol
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F / m

DEFAULT_TEMPERATURE = 298.15    # K
