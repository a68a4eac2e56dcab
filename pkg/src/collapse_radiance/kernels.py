"""Pieces shared by the CSL and DP rate modules."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError, SemiclassicalValidityWarning

__all__ = ["colored_filter", "check_energy", "gaussian_angular_average", "radial_quad"]

SEMICLASSICAL_MIN_KEV = 1.0


def colored_filter(energy_kev: float, e_cutoff_kev: float) -> float:
    """Lorentzian factor E_c^2 / (E_c^2 + E^2) of exponentially correlated noise."""
    if not energy_kev > 0:
        raise ValueError(f"photon energy must be positive, got {energy_kev!r} keV")
    if not e_cutoff_kev > 0:
        raise ValueError(f"cutoff energy must be positive, got {e_cutoff_kev!r} keV")
    ec2 = e_cutoff_kev * e_cutoff_kev
    return ec2 / (ec2 + energy_kev * energy_kev)


def check_energy(energy_kev: float, warn: bool = True) -> float:
    energy_kev = float(energy_kev)
    if not (math.isfinite(energy_kev) and energy_kev > 0):
        raise ValueError(f"photon energy must be positive and finite, got {energy_kev!r} keV")
    if warn and energy_kev < SEMICLASSICAL_MIN_KEV:
        warnings.warn(
            f"E = {energy_kev:g} keV is below the 1 keV validity limit of the semiclassical rates",
            SemiclassicalValidityWarning,
            stacklevel=3,
        )
    return energy_kev


def gaussian_angular_average(u, d):
    """Angular average of a unit-variance 3D Gaussian centred at distance ``d``.

    Evaluated on the sphere of radius ``u``:
    (2 pi)^-3/2 exp(-(u^2 + d^2)/2) sinh(u d)/(u d), written so that neither
    the exponential nor sinh overflows for large ``u d``.
    """
    u = np.asarray(u, dtype=float)
    ud = u * d
    with np.errstate(invalid="ignore", divide="ignore"):
        shc = np.where(ud > 1e-12, -np.expm1(-2.0 * ud) / (2.0 * np.where(ud > 0, ud, 1.0)), 1.0 - ud)
    return (2.0 * np.pi) ** -1.5 * np.exp(-0.5 * (u - d) ** 2) * shc


def radial_quad(func, lo, hi, points=(), epsrel=1e-10, target=1e-8, scale=None):
    """Integrate ``func`` on ``[lo, hi]`` and check the error estimate.

    The achieved tolerance is ``abserr / scale`` (``scale`` defaults to the
    magnitude of the result). Returns ``(value, achieved)``.
    """
    pts = [p for p in points if lo < p < hi]
    value, abserr = integrate.quad(func, lo, hi, points=pts or None, epsabs=0.0, epsrel=epsrel, limit=400)
    ref = abs(value) if scale is None else scale
    achieved = abserr / ref if ref > 0 else abserr
    if not math.isfinite(value) or achieved > target:
        raise QuadratureError(
            f"quadrature reached relative tolerance {achieved:.3g}, target {target:.3g}",
            achieved=achieved,
            target=target,
        )
    return value, achieved
