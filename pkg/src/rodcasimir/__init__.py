"""Casimir-Lifshitz interaction between two thin dielectric rods in a medium."""
from .analysis import SweepReport, local_exponent, sweep
from .dielectric import (ConstantModel, CrossingReport, DielectricModel, MaterialCardError, Oscillator,
                         OscillatorModel, TabulatedLossData, eval_epsilon, find_crossings, kk_transform,
                         load_material_card)
from .free_energy import EnergyMode, EnergyResult, IntegrationSettings, force_per_length, free_energy, g_term
from .matsubara import ThermalEnvironment, matsubara_frequency, matsubara_weight
from .rod_kernel import KernelMode, RodSystem, gamma, kernel_G
from .special_functions import bessel_k

__version__ = "0.1.0"

__all__ = [
    "ConstantModel", "CrossingReport", "DielectricModel", "EnergyMode", "EnergyResult",
    "IntegrationSettings", "KernelMode", "MaterialCardError", "Oscillator", "OscillatorModel",
    "RodSystem", "SweepReport", "TabulatedLossData", "ThermalEnvironment", "bessel_k",
    "eval_epsilon", "find_crossings", "force_per_length", "free_energy", "g_term", "gamma",
    "kernel_G", "kk_transform", "load_material_card", "local_exponent", "matsubara_frequency",
    "matsubara_weight", "sweep",
]
