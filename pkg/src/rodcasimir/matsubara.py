"""Physical constants, thermal environment and Matsubara frequencies."""
import math
from dataclasses import dataclass

# CODATA 2018; hbar, k_B and c are exact in the 2019 SI.
HBAR = 6.62607015e-34 / (2.0 * math.pi)  # J s
K_BOLTZMANN = 1.380649e-23  # J/K
C_LIGHT = 299792458.0  # m/s

DEFAULT_TEMPERATURE = 300.0  # K


@dataclass(frozen=True)
class ThermalEnvironment:
    """Temperature plus the constants entering the Matsubara sum."""

    temperature: float = DEFAULT_TEMPERATURE
    hbar: float = HBAR
    k_boltzmann: float = K_BOLTZMANN
    c: float = C_LIGHT

    def __post_init__(self):
        for name in ("temperature", "hbar", "k_boltzmann", "c"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def beta(self):
        """Inverse thermal energy 1/(k_B T) in 1/J."""
        return 1.0 / (self.k_boltzmann * self.temperature)

    @property
    def kT(self):
        return self.k_boltzmann * self.temperature

    @property
    def spacing(self):
        """Matsubara spacing 2 pi k_B T / hbar in rad/s."""
        return 2.0 * math.pi * self.k_boltzmann * self.temperature / self.hbar


def matsubara_frequency(env, n):
    """n-th Matsubara frequency in rad/s."""
    if n < 0:
        raise ValueError("Matsubara index must be nonnegative")
    return n * env.spacing


def matsubara_weight(n):
    """Weight of the n-th term in the primed sum: 1/2 for n = 0, else 1."""
    if n < 0:
        raise ValueError("Matsubara index must be nonnegative")
    return 0.5 if n == 0 else 1.0
