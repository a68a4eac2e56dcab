"""
Spontaneous emission rates of atoms in the Diosi-Penrose (DP) model.

Rates use Diosi's original normalization of the gravitational noise. Results
quoted in the Penrose convention are larger by ``PENROSE_CONVENTION_FACTOR``
(8 pi); multiply by it to compare with such numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .atoms import Atom, PairGeometry, enumerate_pairs
from .constants import C_LIGHT, E_CHARGE, EPSILON0, G_NEWTON, photon_argument, sinc
from .kernels import check_energy, colored_filter, gaussian_angular_average, radial_quad

__all__ = [
    "DpParams",
    "PENROSE_CONVENTION_FACTOR",
    "dp_prefactor",
    "dp_f_ij_gaussian",
    "dp_overlap_integral",
    "dp_structure_factor",
    "dp_rate_general",
    "dp_rate_simple",
]

PENROSE_CONVENTION_FACTOR = 8.0 * math.pi


@dataclass(frozen=True)
class DpParams:
    """Mass-density resolution ``r0`` (m) and optional cutoff ``e_cutoff`` (keV).

    ``g_scale`` multiplies Newton's constant in the rate; it is 1 for the
    physical model and serves as the fitted amplitude in inference.
    """

    r0: float
    e_cutoff: float | None = None
    g_scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.r0) and self.r0 > 0):
            raise ValueError(f"r0 must be > 0, got {self.r0!r}")
        if self.e_cutoff is not None and not (self.e_cutoff > 0):
            raise ValueError(f"e_cutoff must be > 0 when given, got {self.e_cutoff!r}")
        if not (math.isfinite(self.g_scale) and self.g_scale >= 0):
            raise ValueError(f"g_scale must be >= 0, got {self.g_scale!r}")


def dp_prefactor(r0: float, g_scale: float = 1.0) -> float:
    """G e^2 / (12 pi^(5/2) eps0 c^3 R0^3); divide by E in keV for the per-keV rate."""
    return g_scale * G_NEWTON * E_CHARGE**2 / (12.0 * math.pi**2.5 * EPSILON0 * C_LIGHT**3 * r0**3)


def dp_f_ij_gaussian(distance: float, r0: float) -> float:
    """Overlap of two Gaussian mass densities of width ``r0``, closed form."""
    if distance < 0:
        raise ValueError(f"distance must be non-negative, got {distance!r}")
    if not r0 > 0:
        raise ValueError(f"r0 must be positive, got {r0!r}")
    return math.exp(-distance * distance / (4.0 * r0 * r0)) / (2.0 * math.sqrt(math.pi) * r0**3)


def dp_overlap_integral(distance: float, r0: float, target: float = 1e-8) -> float:
    """4 pi times the overlap integral of two normalized Gaussian densities.

    Numerical counterpart of :func:`dp_f_ij_gaussian`: one density is put at
    the origin and the other is averaged over directions analytically, leaving
    a radial quadrature in units of ``r0``.
    """
    if distance < 0:
        raise ValueError(f"distance must be non-negative, got {distance!r}")
    if not r0 > 0:
        raise ValueError(f"r0 must be positive, got {r0!r}")
    big_d = distance / r0

    def integrand(u):
        g_i = (2.0 * math.pi) ** -1.5 * math.exp(-0.5 * u * u)
        return 4.0 * math.pi * u * u * g_i * float(gaussian_angular_average(u, big_d))

    # the product of the two Gaussians peaks at u = d/2 with unit-order width
    centre = 0.5 * big_d
    value, _ = radial_quad(integrand, max(0.0, centre - 12.0), centre + 12.0, points=(centre,), target=target)
    return 4.0 * math.pi * value / r0**3


def dp_structure_factor(atom: Atom, energy_kev: float, r0: float, geom: PairGeometry | None = None) -> float:
    """The braces of the orbital-parametrized DP rate (no CSL polynomial factor)."""
    energy_kev = check_energy(energy_kev, warn=False)
    inv4r2 = 1.0 / (4.0 * r0 * r0)
    total = 0.0
    for term in enumerate_pairs(atom, geom):
        d = term.distance
        total += term.charge_sign * term.multiplicity * sinc(photon_argument(d, energy_kev)) * math.exp(-d * d * inv4r2)
    return total


def _apply_filter(rate, energy_kev, e_cutoff):
    if e_cutoff is None:
        return rate
    return rate * colored_filter(energy_kev, e_cutoff)


def dp_rate_general(atom: Atom, energy_kev: float, params: DpParams, geom: PairGeometry | None = None) -> float:
    """General DP rate in 1/(s keV); warns below 1 keV."""
    energy_kev = check_energy(energy_kev)
    rate = dp_prefactor(params.r0, params.g_scale) * dp_structure_factor(atom, energy_kev, params.r0, geom) / energy_kev
    return _apply_filter(rate, energy_kev, params.e_cutoff)


def dp_rate_simple(atom: Atom, energy_kev: float, params: DpParams) -> float:
    """High-energy DP rate, proportional to (N_p^2 + N_e)/E."""
    energy_kev = check_energy(energy_kev)
    n_p, n_e = atom.n_protons, atom.n_electrons
    rate = dp_prefactor(params.r0, params.g_scale) * float(n_p * n_p + n_e) / energy_kev
    return _apply_filter(rate, energy_kev, params.e_cutoff)
