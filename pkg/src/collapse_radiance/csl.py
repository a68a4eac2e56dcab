"""
Spontaneous emission rates of atoms in the CSL model.

All rates are differential per-atom rates dGamma/dE in 1/(s keV); photon
energies are in keV and lengths in metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .atoms import Atom, PairGeometry, enumerate_pairs
from .constants import C_LIGHT, E_CHARGE, EPSILON0, HBAR, M0_NUCLEON, photon_argument, sinc
from .kernels import check_energy, colored_filter, gaussian_angular_average, radial_quad

__all__ = [
    "CslParams",
    "csl_prefactor",
    "csl_f_ij_pointlike",
    "csl_f_ij_extended",
    "csl_structure_factor",
    "csl_rate_general",
    "csl_rate_simple",
    "csl_rate_longwave",
    "colored_filter",
]


@dataclass(frozen=True)
class CslParams:
    """Collapse strength ``lambda_rate`` (1/s), correlation length ``r_c`` (m)
    and optional noise cutoff ``e_cutoff`` (keV, ``None`` for white noise)."""

    lambda_rate: float
    r_c: float
    e_cutoff: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lambda_rate) and self.lambda_rate >= 0):
            raise ValueError(f"lambda_rate must be >= 0, got {self.lambda_rate!r}")
        if not (math.isfinite(self.r_c) and self.r_c > 0):
            raise ValueError(f"r_c must be > 0, got {self.r_c!r}")
        if self.e_cutoff is not None and not (self.e_cutoff > 0):
            raise ValueError(f"e_cutoff must be > 0 when given, got {self.e_cutoff!r}")


def csl_prefactor(lambda_rate: float, r_c: float) -> float:
    """hbar e^2 lambda / (12 pi^2 eps0 c^3 m0^2 r_C^2).

    Dividing by the photon energy in keV gives the rate per keV multiplying
    the structure factor.
    """
    return HBAR * E_CHARGE**2 * lambda_rate / (12.0 * math.pi**2 * EPSILON0 * C_LIGHT**3 * M0_NUCLEON**2 * r_c**2)


def _csl_kernel(d2: float, r_c: float) -> float:
    # exp(-d^2/4r_C^2) (3 - d^2/2r_C^2), i.e. f_ij * 2 r_C^2 / (m_i m_j)
    x = d2 / (r_c * r_c)
    return math.exp(-0.25 * x) * (3.0 - 0.5 * x)


def csl_f_ij_pointlike(distance: float, r_c: float, m_i: float, m_j: float) -> float:
    if distance < 0:
        raise ValueError(f"distance must be non-negative, got {distance!r}")
    if not r_c > 0:
        raise ValueError(f"r_c must be positive, got {r_c!r}")
    return m_i * m_j / (2.0 * r_c * r_c) * _csl_kernel(distance * distance, r_c)


def csl_f_ij_extended(
    density_width_i: float,
    density_width_j: float,
    distance: float,
    r_c: float,
    m_i: float,
    m_j: float,
    target: float = 1e-8,
) -> float:
    """CSL pair factor for spherical Gaussian mass densities.

    ``density_width_*`` are the standard deviations (per axis) of the two mass
    densities. The six-dimensional double integral depends only on the
    separation ``s' - s``, which is Gaussian with variance ``w_i^2 + w_j^2``;
    its angular integral is analytic, leaving a single radial quadrature.

    Raises :class:`~collapse_radiance.errors.QuadratureError` if the achieved
    relative tolerance exceeds ``target``.
    """
    if density_width_i < 0 or density_width_j < 0:
        raise ValueError("density widths must be non-negative")
    if distance < 0:
        raise ValueError(f"distance must be non-negative, got {distance!r}")
    if not r_c > 0:
        raise ValueError(f"r_c must be positive, got {r_c!r}")
    if m_i == 0 or m_j == 0:
        return 0.0
    s = math.hypot(density_width_i, density_width_j)
    if s == 0:
        return csl_f_ij_pointlike(distance, r_c, m_i, m_j)

    big_d = distance / s

    def integrand(u):
        r = s * u
        return 4.0 * math.pi * u * u * float(gaussian_angular_average(u, big_d)) * _csl_kernel(r * r, r_c)

    lo = max(0.0, big_d - 14.0)
    hi = big_d + 14.0
    # scale = kernel maximum, so results near the kernel zero d = sqrt(6) r_C are judged absolutely
    value, _ = radial_quad(integrand, lo, hi, points=(big_d,), epsrel=1e-11, target=target, scale=3.0)
    return m_i * m_j / (2.0 * r_c * r_c) * value


def csl_structure_factor(atom: Atom, energy_kev: float, r_c: float, geom: PairGeometry | None = None) -> float:
    """The braces of the orbital-parametrized CSL rate.

    Equals 3 N_p^2 + 3 N_e plus the signed, sinc- and Gaussian-weighted
    proton-electron, same-shell and cross-shell terms.
    """
    energy_kev = check_energy(energy_kev, warn=False)
    total = 0.0
    for term in enumerate_pairs(atom, geom):
        d = term.distance
        total += term.charge_sign * term.multiplicity * sinc(photon_argument(d, energy_kev)) * _csl_kernel(d * d, r_c)
    return total


def _apply_filter(rate: float, energy_kev: float, e_cutoff: float | None) -> float:
    if e_cutoff is None:
        return rate
    return rate * colored_filter(energy_kev, e_cutoff)


def csl_rate_general(atom: Atom, energy_kev: float, params: CslParams, geom: PairGeometry | None = None) -> float:
    """General CSL rate in 1/(s keV); warns below 1 keV."""
    energy_kev = check_energy(energy_kev)
    rate = csl_prefactor(params.lambda_rate, params.r_c) * csl_structure_factor(atom, energy_kev, params.r_c, geom) / energy_kev
    return _apply_filter(rate, energy_kev, params.e_cutoff)


def csl_rate_simple(atom: Atom, energy_kev: float, params: CslParams) -> float:
    """High-energy CSL rate, proportional to (N_p^2 + N_e)/E."""
    energy_kev = check_energy(energy_kev)
    n_p, n_e = atom.n_protons, atom.n_electrons
    rate = csl_prefactor(params.lambda_rate, params.r_c) * (3.0 * (n_p * n_p + n_e)) / energy_kev
    return _apply_filter(rate, energy_kev, params.e_cutoff)


def csl_rate_longwave(atom: Atom, energy_kev: float, params: CslParams) -> float:
    """Long-wavelength CSL rate, proportional to (N_p - N_e)^2; zero for neutral atoms."""
    energy_kev = check_energy(energy_kev)
    q = atom.n_protons - atom.n_electrons
    rate = csl_prefactor(params.lambda_rate, params.r_c) * (3.0 * q * q) / energy_kev
    return _apply_filter(rate, energy_kev, params.e_cutoff)
