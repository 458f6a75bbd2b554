"""Equation of state, opacities and radiation closures.

Units are cgs with temperature in eV: lengths in cm, times in s, energies in
erg, specific heat in erg/eV/g.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SPEED_OF_LIGHT = 2.99792458e10  # cm/s
STEFAN_BOLTZMANN = 5.670374419e-5  # erg / (s cm^2 K^4)
KELVIN_PER_EV = 11604.5

# a = 4 sigma_SB / c, converted from K^-4 to eV^-4; evaluates to ~137.20
RADIATION_CONSTANT = 4.0 * STEFAN_BOLTZMANN / SPEED_OF_LIGHT * KELVIN_PER_EV**4

# Applied to sigma_a + sigma_s before forming D.
OPACITY_FLOOR = 1e-10


@dataclass(frozen=True)
class Constants:
    c: float = SPEED_OF_LIGHT
    a: float = RADIATION_CONSTANT

    def __post_init__(self):
        if not (self.c > 0 and self.a > 0):
            raise DomainError(f"constants must be positive, got c={self.c}, a={self.a}")


@dataclass(frozen=True)
class EosIdealGas:
    gamma: float
    c_v: float

    def __post_init__(self):
        if not self.gamma > 1:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")
        if not self.c_v > 0:
            raise DomainError(f"c_v must be positive, got {self.c_v}")


@dataclass(frozen=True)
class ConstantOpacity:
    sigma_a: float
    sigma_s: float = 0.0


@dataclass(frozen=True)
class PowerLawOpacity:
    """sigma_a = coeff_a rho^rho_exp_a T^T_exp_a,  sigma_s = coeff_s rho^rho_exp_s."""

    coeff_a: float
    rho_exp_a: float
    T_exp_a: float
    coeff_s: float = 0.0
    rho_exp_s: float = 1.0


OpacityModel = ConstantOpacity | PowerLawOpacity


def pressure(eos: EosIdealGas, rho, e_i):
    return (eos.gamma - 1.0) * rho * e_i


def temperature_from_eos(eos: EosIdealGas, rho, e_i):
    # rho is part of the signature for a general EOS; constant c_v ignores it
    return e_i / eos.c_v


def internal_energy_from_temperature(eos: EosIdealGas, T):
    return eos.c_v * T


def opacities(model: OpacityModel, rho, T):
    """Return ``(sigma_a, sigma_s, sigma_E, sigma_p)`` in cm^-1.

    The gray energy and Planck means are both taken equal to ``sigma_a``;
    scattering only enters the diffusion coefficient.
    """
    rho = np.asarray(rho, dtype=float)
    T = np.asarray(T, dtype=float)
    if isinstance(model, ConstantOpacity):
        shape = np.broadcast(rho, T).shape
        sigma_a = np.full(shape, model.sigma_a)
        sigma_s = np.full(shape, model.sigma_s)
    elif isinstance(model, PowerLawOpacity):
        if np.any(T <= 0):
            raise DomainError("power-law opacity requires T > 0")
        sigma_a = model.coeff_a * rho**model.rho_exp_a * T**model.T_exp_a
        sigma_s = model.coeff_s * rho**model.rho_exp_s * np.ones_like(T)
    else:
        raise TypeError(f"unsupported opacity model {model!r}")
    if sigma_a.ndim == 0:
        sigma_a, sigma_s = float(sigma_a), float(sigma_s)
    return sigma_a, sigma_s, sigma_a, sigma_a


def diffusion_coefficient(constants: Constants, sigma_a, sigma_s):
    """Gray diffusion coefficient ``c / (3 (sigma_a + sigma_s))``."""
    sigma_t = np.asarray(sigma_a, dtype=float) + sigma_s
    if np.any(sigma_t <= 0):
        raise ZeroDivisionError("total opacity must be positive; apply OPACITY_FLOOR")
    D = constants.c / (3.0 * sigma_t)
    return float(D) if np.ndim(D) == 0 else D


def radiation_pressure(E_r):
    """Eddington closure."""
    return E_r / 3.0


def sound_speed(eos: EosIdealGas, rho, p):
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("sound speed needs rho > 0")
    if np.any(p < 0):
        raise DomainError("sound speed needs p >= 0")
    cs = np.sqrt(eos.gamma * p / rho)
    return float(cs) if cs.ndim == 0 else cs
