"""
Physical constants and unit conversions.

Values are the CODATA 2018 recommended values, frozen here so that rate
prefactors are reproducible regardless of the installed scipy (which may ship
a newer adjustment). Everything inside the package is evaluated in SI units;
keV and angstrom appear only at the I/O boundary through the helpers below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhysicalConstants",
    "CODATA2018",
    "HBAR",
    "C_LIGHT",
    "EPSILON0",
    "E_CHARGE",
    "M0_NUCLEON",
    "G_NEWTON",
    "KEV_IN_JOULE",
    "BOHR_RADIUS",
    "ANGSTROM",
    "ELECTRON_MASS",
    "PROTON_MASS",
    "SINC_TAYLOR_THRESHOLD",
    "kev_to_joule",
    "joule_to_kev",
    "angstrom_to_m",
    "hbar_c_kev_m",
    "sinc",
    "photon_argument",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """Constant set entering the rate formulas (SI units)."""

    hbar: float          # J s
    c: float             # m / s
    epsilon0: float      # F / m
    e_charge: float      # C
    m0_nucleon: float    # kg, CSL reference mass
    G_newton: float      # m^3 / (kg s^2)
    keV_in_joule: float  # J

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"constant {name} must be positive and finite, got {value!r}")


# CODATA 2018. hbar, c, e are exact in the 2019 SI; m0 is the atomic mass
# constant, the conventional CSL reference nucleon mass.
CODATA2018 = PhysicalConstants(
    hbar=1.054571817e-34,
    c=299792458.0,
    epsilon0=8.8541878128e-12,
    e_charge=1.602176634e-19,
    m0_nucleon=1.66053906660e-27,
    G_newton=6.67430e-11,
    keV_in_joule=1.602176634e-16,
)

HBAR = CODATA2018.hbar
C_LIGHT = CODATA2018.c
EPSILON0 = CODATA2018.epsilon0
E_CHARGE = CODATA2018.e_charge
M0_NUCLEON = CODATA2018.m0_nucleon
G_NEWTON = CODATA2018.G_newton
KEV_IN_JOULE = CODATA2018.keV_in_joule

BOHR_RADIUS = 5.29177210903e-11      # m, CODATA 2018
ELECTRON_MASS = 9.1093837015e-31     # kg, CODATA 2018
PROTON_MASS = 1.67262192369e-27      # kg, CODATA 2018
ANGSTROM = 1e-10

SINC_TAYLOR_THRESHOLD = 1e-4


def kev_to_joule(energy_kev):
    return energy_kev * KEV_IN_JOULE


def joule_to_kev(energy_j):
    return energy_j / KEV_IN_JOULE


def angstrom_to_m(length_a):
    return length_a * ANGSTROM


def hbar_c_kev_m() -> float:
    """hbar*c expressed in keV*m (about 1.9733e-10)."""
    return HBAR * C_LIGHT / KEV_IN_JOULE


def sinc(x: float) -> float:
    """Unnormalized sinc, sin(x)/x, with a quartic Taylor branch near zero.

    Below ``SINC_TAYLOR_THRESHOLD`` the series 1 - x^2/6 + x^4/120 is used;
    its truncation error there is ~1e-26, far below double precision.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"sinc argument must be finite, got {x!r}")
    if abs(x) < SINC_TAYLOR_THRESHOLD:
        x2 = x * x
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    return math.sin(x) / x


def photon_argument(distance: float, energy_kev: float) -> float:
    """Dimensionless phase distance*E/(hbar c), i.e. 2*pi*distance/wavelength."""
    if distance < 0:
        raise ValueError(f"distance must be non-negative, got {distance!r}")
    if not energy_kev > 0:
        raise ValueError(f"photon energy must be positive, got {energy_kev!r} keV")
    return distance * kev_to_joule(energy_kev) / (HBAR * C_LIGHT)
