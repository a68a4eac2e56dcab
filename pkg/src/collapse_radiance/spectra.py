"""
Spectra over energy grids, shape normalization and model diagnostics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .atoms import Atom, PairGeometry, atom_to_document, parse_atom
from .csl import CslParams, csl_prefactor, csl_rate_general, csl_rate_longwave, csl_rate_simple, csl_structure_factor
from .dp import DpParams, dp_prefactor, dp_rate_general, dp_rate_simple, dp_structure_factor
from .errors import AlreadyNormalizedError, GridMismatchError, ModelMismatchError, SemiclassicalValidityWarning
from .kernels import SEMICLASSICAL_MIN_KEV, check_energy

__all__ = [
    "ModelTag",
    "EnergyGrid",
    "Spectrum",
    "AlphaBand",
    "SurveyRow",
    "compute_spectrum",
    "spectrum_from_echo",
    "normalize_shape",
    "alpha_band",
    "convergence_energy",
    "cancellation_factor",
    "z_survey",
    "rate",
    "params_from_dict",
]


class ModelTag(str, Enum):
    CSL_GENERAL = "csl_general"
    CSL_SIMPLE = "csl_simple"
    CSL_LONGWAVE = "csl_longwave"
    DP_GENERAL = "dp_general"
    DP_SIMPLE = "dp_simple"

    @property
    def family(self) -> str:
        return self.value.split("_")[0]

    @property
    def is_general(self) -> bool:
        return self.value.endswith("_general")

    @classmethod
    def parse(cls, tag) -> "ModelTag":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).strip().lower().replace("-", "_"))
        except ValueError:
            raise ModelMismatchError(f"unknown model tag {tag!r}; expected one of {[t.value for t in cls]}") from None


@dataclass(frozen=True, eq=False)
class EnergyGrid:
    """Strictly increasing photon energies in keV."""

    points: np.ndarray
    spacing: str = "custom"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("energy grid must be a non-empty 1D sequence")
        if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
            raise ValueError("energy grid points must be positive and finite")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("energy grid must be strictly increasing")
        if self.spacing not in ("linear", "log", "custom"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def log(cls, emin: float, emax: float, n: int) -> "EnergyGrid":
        if n < 2 or not (0 < emin < emax):
            raise ValueError("log grid needs 0 < emin < emax and n >= 2")
        return cls(np.logspace(math.log10(emin), math.log10(emax), n), "log")

    @classmethod
    def linear(cls, emin: float, emax: float, n: int) -> "EnergyGrid":
        if n < 2 or not (0 < emin < emax):
            raise ValueError("linear grid needs 0 < emin < emax and n >= 2")
        return cls(np.linspace(emin, emax, n), "linear")

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        return isinstance(other, EnergyGrid) and np.array_equal(self.points, other.points)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: EnergyGrid
    values: np.ndarray
    model_tag: ModelTag
    atom_symbol: str
    params_echo: dict = field(repr=False)
    noise: str = "markovian"
    negativity_flag: bool = False
    sub_kev_flag: bool = False
    normalized: bool = False

    @property
    def units(self) -> str:
        return "1/keV (structure factor / E)" if self.normalized else "1/(s keV)"


def params_from_dict(family: str, d: dict):
    if family == "csl":
        return CslParams(d["lambda_rate"], d["r_c"], d.get("e_cutoff"))
    return DpParams(d["r0"], d.get("e_cutoff"), d.get("g_scale", 1.0))


def _check_params(tag: ModelTag, params) -> None:
    expected = CslParams if tag.family == "csl" else DpParams
    if not isinstance(params, expected):
        raise ModelMismatchError(f"model {tag.value} needs {expected.__name__}, got {type(params).__name__}")


def rate(tag, atom: Atom, energy_kev: float, params, geom: PairGeometry | None = None) -> float:
    """Dispatch to the scalar rate operation of ``tag``."""
    tag = ModelTag.parse(tag)
    _check_params(tag, params)
    if tag is ModelTag.CSL_GENERAL:
        return csl_rate_general(atom, energy_kev, params, geom)
    if tag is ModelTag.CSL_SIMPLE:
        return csl_rate_simple(atom, energy_kev, params)
    if tag is ModelTag.CSL_LONGWAVE:
        return csl_rate_longwave(atom, energy_kev, params)
    if tag is ModelTag.DP_GENERAL:
        return dp_rate_general(atom, energy_kev, params, geom)
    return dp_rate_simple(atom, energy_kev, params)


def compute_spectrum(model_tag, atom: Atom, params, geom: PairGeometry | None, grid: EnergyGrid) -> Spectrum:
    """Evaluate a rate model at every grid point.

    Each value is produced by the same scalar call a user would make, so the
    spectrum is bitwise identical to pointwise evaluation.
    """
    tag = ModelTag.parse(model_tag)
    _check_params(tag, params)
    geom = geom or PairGeometry()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SemiclassicalValidityWarning)
        values = np.array([rate(tag, atom, e, params, geom) for e in grid.points], dtype=float)
    values.setflags(write=False)
    echo = {
        "model_tag": tag.value,
        "params": asdict(params),
        "geometry": asdict(geom),
        "atom": atom_to_document(atom),
    }
    return Spectrum(
        grid=grid,
        values=values,
        model_tag=tag,
        atom_symbol=atom.symbol,
        params_echo=echo,
        noise="markovian" if params.e_cutoff is None else "colored",
        negativity_flag=bool(np.any(values < 0)),
        sub_kev_flag=bool(np.any(grid.points < SEMICLASSICAL_MIN_KEV)),
    )


def spectrum_from_echo(echo: dict, grid: EnergyGrid) -> Spectrum:
    """Recompute a spectrum from its ``params_echo`` record."""
    tag = ModelTag.parse(echo["model_tag"])
    params = params_from_dict(tag.family, echo["params"])
    geom = PairGeometry(**echo["geometry"])
    return compute_spectrum(tag, parse_atom(echo["atom"]), params, geom, grid)


def _common_prefactor(tag: ModelTag, params) -> float:
    if tag.family == "csl":
        return csl_prefactor(params.lambda_rate, params.r_c)
    return dp_prefactor(params.r0, params.g_scale)


def normalize_shape(spectrum: Spectrum) -> Spectrum:
    """Divide out the model's constant prefactor, keeping the 1/E and filter.

    CSL spectra (general, simple and long-wavelength alike) are divided by the
    general-rate prefactor hbar e^2 lambda / (12 pi^2 eps0 c^3 m0^2 r_C^2), so
    the simple shape reads 3 (N_p^2 + N_e) / E. DP spectra are divided by
    G e^2 / (12 pi^(5/2) eps0 c^3 R0^3).
    """
    if spectrum.normalized:
        raise AlreadyNormalizedError("spectrum is already normalized")
    tag = spectrum.model_tag
    params = params_from_dict(tag.family, spectrum.params_echo["params"])
    pref = _common_prefactor(tag, params)
    if pref == 0:
        raise ValueError("cannot normalize a spectrum with zero prefactor (lambda = 0 or g_scale = 0)")
    values = spectrum.values / pref
    values.setflags(write=False)
    return replace(spectrum, values=values, normalized=True)


class AlphaBand(NamedTuple):
    lower: Spectrum
    mid: Spectrum
    upper: Spectrum
    alphas: tuple


def alpha_band(model_tag, atom: Atom, params, grid: EnergyGrid, alpha_range=(1.0, 1.5), n_samples: int = 11,
               beta: float = 1.04) -> AlphaBand:
    """Pointwise envelope of spectra over same-shell coefficients in ``alpha_range``.

    The sampled alphas are ``n_samples`` evenly spaced values including both
    ends, plus the midpoint, whose curve is returned as ``mid``.
    """
    lo, hi = (float(a) for a in alpha_range)
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise ValueError(f"invalid alpha range {alpha_range!r}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    mid_alpha = 0.5 * (lo + hi)
    alphas = sorted(set(np.linspace(lo, hi, max(n_samples, 2)).tolist()) | {mid_alpha})
    spectra = {a: compute_spectrum(model_tag, atom, params, PairGeometry(a, beta), grid) for a in alphas}
    stack = np.vstack([s.values for s in spectra.values()])
    mid = spectra[mid_alpha]

    def envelope(values, which):
        v = np.array(values)
        v.setflags(write=False)
        echo = dict(mid.params_echo, envelope=which, alpha_range=[lo, hi], alphas=alphas)
        return replace(mid, values=v, params_echo=echo, negativity_flag=bool(np.any(v < 0)))

    return AlphaBand(envelope(stack.min(axis=0), "lower"), mid, envelope(stack.max(axis=0), "upper"), tuple(alphas))


def convergence_energy(general: Spectrum, simple: Spectrum, rel_tol: float = 0.05):
    """Smallest grid energy above which ``general/simple`` stays within ``rel_tol`` of 1.

    Returns ``None`` when even the last grid point fails. All points above the
    returned energy satisfy the condition, not just the first crossing.
    """
    if not (0 < rel_tol < 1):
        raise ValueError("rel_tol must lie in (0, 1)")
    if general.grid != simple.grid:
        raise GridMismatchError("spectra are defined on different grids")
    if general.atom_symbol != simple.atom_symbol:
        raise GridMismatchError(f"spectra belong to different atoms ({general.atom_symbol} vs {simple.atom_symbol})")
    with np.errstate(divide="ignore", invalid="ignore"):
        dev = np.abs(general.values / simple.values - 1.0)
    bad = np.flatnonzero(~(dev < rel_tol))
    if bad.size == 0:
        return float(general.grid.points[0])
    if bad[-1] == len(general.grid) - 1:
        return None
    return float(general.grid.points[bad[-1] + 1])


def _asymptotic_structure(tag: ModelTag, atom: Atom) -> float:
    n = atom.n_protons**2 + atom.n_electrons
    return 3.0 * n if tag.family == "csl" else float(n)


def cancellation_factor(atom: Atom, energy_kev: float, model_tag, params, geom: PairGeometry | None = None) -> float:
    """Structure factor relative to its high-energy value N_p^2 + N_e (times 3 for CSL).

    Near 1: no cancellation. Near 0: protons and electrons emit in antiphase.
    """
    tag = ModelTag.parse(model_tag)
    _check_params(tag, params)
    energy_kev = check_energy(energy_kev, warn=False)
    if tag is ModelTag.CSL_GENERAL:
        s = csl_structure_factor(atom, energy_kev, params.r_c, geom)
    elif tag is ModelTag.DP_GENERAL:
        s = dp_structure_factor(atom, energy_kev, params.r0, geom)
    elif tag is ModelTag.CSL_LONGWAVE:
        s = 3.0 * (atom.n_protons - atom.n_electrons) ** 2
    else:
        return 1.0
    return s / _asymptotic_structure(tag, atom)


class SurveyRow(NamedTuple):
    symbol: str
    z: int
    rate: float
    cancellation_factor: float


def z_survey(atoms: Sequence[Atom], energy_kev: float, model_tag, params, geom: PairGeometry | None = None):
    """Rate and cancellation factor per atom at one energy, sorted by rate (descending)."""
    if not atoms:
        raise ValueError("z_survey needs at least one atom")
    rows = [
        SurveyRow(a.symbol, a.n_protons, rate(model_tag, a, energy_kev, params, geom),
                  cancellation_factor(a, energy_kev, model_tag, params, geom))
        for a in atoms
    ]
    return sorted(rows, key=lambda r: r.rate, reverse=True)
