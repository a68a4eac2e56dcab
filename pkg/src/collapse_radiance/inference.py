"""
Synthetic counting spectra and iterative correlation-length estimation.

The measured spectrum is modelled per bin as

    mu = (amplitude * shape(E; corr_length) * efficiency + background) * exposure * width

where ``shape`` is the general rate evaluated at unit amplitude (lambda = 1 /s
for CSL, g_scale = 1 for DP). ``exposure`` multiplies a per-atom rate, so it
carries units of atom-seconds when a target of many atoms is simulated.

Correlation length and amplitude are estimated by alternating an amplitude fit
at fixed correlation length with an update rule for the correlation length,
repeated until the correlation length stops moving.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .atoms import Atom, PairGeometry
from .csl import CslParams
from .dp import DpParams
from .errors import DegenerateDesignError, IterationError, SemiclassicalValidityWarning
from .spectra import EnergyGrid, ModelTag, rate

__all__ = [
    "SyntheticSpectrum",
    "AmplitudeFit",
    "FitDiagnostics",
    "FitResult",
    "expected_counts",
    "synth_counts",
    "shape_values",
    "fit_amplitude",
    "profile_chi2",
    "ProfileChi2Update",
    "identity_update",
    "iterate_corr_length",
    "bin_widths",
]


@dataclass(frozen=True, eq=False)
class SyntheticSpectrum:
    grid: EnergyGrid               # bin centres, keV
    bin_width: np.ndarray          # keV
    counts: np.ndarray             # int64
    exposure: float                # s (atom s)
    efficiency: np.ndarray
    background_rate: np.ndarray    # counts / (atom s keV), same exposure as the signal
    seed: int | None
    truth: dict = field(default_factory=dict)
    clamped_flag: bool = False

    @property
    def n_bins(self) -> int:
        return len(self.grid)


def _per_bin(value, n, name, lo=None, hi=None) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (n,)).copy()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if lo is not None and np.any(arr < lo):
        raise ValueError(f"{name} must be >= {lo}")
    if hi is not None and np.any(arr > hi):
        raise ValueError(f"{name} must be <= {hi}")
    return arr


def _check_bins(grid: EnergyGrid, width: np.ndarray) -> None:
    if np.any(width <= 0):
        raise ValueError("invalid bin geometry: bin widths must be positive")
    lo = grid.points - 0.5 * width
    hi = grid.points + 0.5 * width
    if np.any(lo <= 0):
        raise ValueError("invalid bin geometry: bins extend below zero energy")
    # tolerate rounding when bins are exactly adjacent
    if np.any(lo[1:] < hi[:-1] * (1 - 1e-12)):
        raise ValueError("invalid bin geometry: bins overlap")


def _family_params(family: str, amplitude: float, corr_length: float, e_cutoff=None):
    if family == "csl":
        return CslParams(amplitude, corr_length, e_cutoff)
    return DpParams(corr_length, e_cutoff, amplitude)


def shape_values(model_tag, atom: Atom, grid: EnergyGrid, corr_length: float, geom: PairGeometry | None = None,
                 e_cutoff: float | None = None) -> np.ndarray:
    """Rate at unit amplitude on the grid, in 1/(s keV)."""
    tag = ModelTag.parse(model_tag)
    params = _family_params(tag.family, 1.0, corr_length, e_cutoff)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SemiclassicalValidityWarning)
        return np.array([rate(tag, atom, e, params, geom) for e in grid.points])


def expected_counts(rates, efficiency, background_rate, exposure, bin_width) -> np.ndarray:
    """Poisson means per bin; negative model rates count as zero."""
    rates = np.clip(np.asarray(rates, dtype=float), 0.0, None)
    return (rates * efficiency + background_rate) * exposure * bin_width


def synth_counts(truth_model, atom: Atom, true_params, geom: PairGeometry | None, grid: EnergyGrid,
                 bin_width, exposure: float, efficiency=1.0, background_rate=0.0, seed: int = 0) -> SyntheticSpectrum:
    """Draw a Poisson counting spectrum from a rate model.

    Bins are integrated with the midpoint rule (rate at the bin centre times
    the width). Counts come from ``numpy.random.Generator(PCG64(seed)).poisson``,
    so identical inputs give identical counts.
    """
    if not (math.isfinite(exposure) and exposure > 0):
        raise ValueError(f"exposure must be positive, got {exposure!r}")
    n = len(grid)
    width = _per_bin(bin_width, n, "bin_width")
    _check_bins(grid, width)
    eff = _per_bin(efficiency, n, "efficiency", 0.0, 1.0)
    bkg = _per_bin(background_rate, n, "background_rate", 0.0)

    tag = ModelTag.parse(truth_model)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SemiclassicalValidityWarning)
        rates = np.array([rate(tag, atom, e, true_params, geom) for e in grid.points])
    mu = expected_counts(rates, eff, bkg, exposure, width)
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.poisson(mu).astype(np.int64)

    geom = geom or PairGeometry()
    truth = {
        "model_tag": tag.value,
        "atom": atom.symbol,
        "params": dict(vars(true_params)),
        "geometry": {"alpha": geom.alpha, "beta": geom.beta},
    }
    return SyntheticSpectrum(grid, width, counts, float(exposure), eff, bkg, seed, truth, bool(np.any(rates < 0)))


@dataclass(frozen=True)
class AmplitudeFit:
    amplitude: float
    sigma: float
    chi2: float
    ndof: int


def _design(data: SyntheticSpectrum, shape: np.ndarray):
    scale = data.exposure * data.bin_width
    return shape * data.efficiency * scale, data.background_rate * scale


def _fit_linear(counts, s, b, max_iter=100):
    """Poisson maximum likelihood for mu = a*s + b via reweighted least squares.

    With weights fixed at the current model prediction the weighted normal
    equation coincides with the Poisson score equation, so the fixed point is
    the maximum-likelihood amplitude.
    """
    n = counts.astype(float)
    w = np.maximum(n, 1.0)
    a = np.sum(s * (n - b) / w) / np.sum(s * s / w)
    for _ in range(max_iter):
        mu = a * s + b
        w = np.where(mu > 0, mu, np.maximum(n, 1.0))
        a_new = np.sum(s * (n - b) / w) / np.sum(s * s / w)
        done = abs(a_new - a) <= 1e-13 * abs(a_new)
        a = a_new
        if done:
            break
    mu = a * s + b
    w = np.where(mu > 0, mu, np.maximum(n, 1.0))
    sigma = 1.0 / math.sqrt(np.sum(s * s / w))
    chi2 = float(np.sum((n - mu) ** 2 / w))
    return float(a), sigma, chi2


def fit_amplitude(data: SyntheticSpectrum, shape_model, atom: Atom, corr_length: float,
                  geom: PairGeometry | None = None, e_cutoff: float | None = None) -> AmplitudeFit:
    """Fit the collapse amplitude at a fixed correlation length.

    The amplitude is lambda (1/s) for CSL shapes and the multiplier of G for DP
    shapes. ``chi2`` is Pearson's statistic at the fitted amplitude.
    """
    ndof = data.n_bins - 1
    if ndof < 1:
        raise DegenerateDesignError("need at least two bins to fit an amplitude")
    shape = shape_values(shape_model, atom, data.grid, corr_length, geom, e_cutoff)
    return _fit_from_shape(data, shape, ndof)


def _fit_from_shape(data, shape, ndof) -> AmplitudeFit:
    s, b = _design(data, shape)
    if not np.any(s != 0):
        raise DegenerateDesignError("model shape is zero in every bin")
    a, sigma, chi2 = _fit_linear(data.counts, s, b)
    return AmplitudeFit(a, sigma, chi2, ndof)


def profile_chi2(data: SyntheticSpectrum, shape_model, atom: Atom, corr_length: float,
                 geom: PairGeometry | None = None, e_cutoff: float | None = None) -> float:
    """chi2 minimized over the amplitude at fixed correlation length."""
    return fit_amplitude(data, shape_model, atom, corr_length, geom, e_cutoff).chi2


@dataclass(frozen=True)
class FitDiagnostics:
    """Context handed to correlation-length update rules."""

    data: SyntheticSpectrum
    shape_model: ModelTag
    atom: Atom
    geom: PairGeometry
    fit: AmplitudeFit
    iteration: int
    e_cutoff: float | None = None


def identity_update(amplitude: float, corr_length: float, diagnostics: FitDiagnostics) -> float:
    return corr_length


class ProfileChi2Update:
    """Move the correlation length to the profile-chi2 minimum.

    The minimum is searched in ``[r / window, r * window]`` around the current
    value ``r``: a log-spaced scan of ``n_scan`` points locates the best
    bracket, then a bounded Brent search refines it in log space. When the
    true minimum lies outside the window the rule stops at the window edge and
    the outer iteration continues from there.
    """

    def __init__(self, window: float = 10.0, n_scan: int = 41, xatol: float = 1e-7):
        if window <= 1:
            raise ValueError("window must exceed 1")
        self.window = window
        self.n_scan = n_scan
        self.xatol = xatol

    def __call__(self, amplitude: float, corr_length: float, diagnostics: FitDiagnostics) -> float:
        d = diagnostics

        def objective(log_r):
            return profile_chi2(d.data, d.shape_model, d.atom, math.exp(log_r), d.geom, d.e_cutoff)

        center = math.log(corr_length)
        half = math.log(self.window)
        grid = np.linspace(center - half, center + half, self.n_scan)
        values = np.array([objective(x) for x in grid])
        k = int(np.argmin(values))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, self.n_scan - 1)]
        res = optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                                       options={"xatol": self.xatol})
        best = res.x if res.fun <= values[k] else grid[k]
        return math.exp(best)


@dataclass
class FitResult:
    """Outcome of :func:`iterate_corr_length`.

    ``amplitude_sigma`` is the marginal standard error with the correlation
    length treated as a free parameter (2x2 Fisher matrix at the optimum);
    ``amplitude_sigma_fixed`` is conditional on the final correlation length.
    """

    amplitude_hat: float
    amplitude_sigma: float
    corr_length_hat: float
    iterations: list
    converged: bool
    chi2: float
    ndof: int
    model_family: str = "csl"
    amplitude_sigma_fixed: float = float("nan")
    corr_length_sigma: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "model_family": self.model_family,
            "amplitude_hat": self.amplitude_hat,
            "amplitude_sigma": self.amplitude_sigma,
            "amplitude_sigma_fixed_corr_length": self.amplitude_sigma_fixed,
            "corr_length_hat_m": self.corr_length_hat,
            "corr_length_sigma_m": self.corr_length_sigma,
            "iterations": [list(p) for p in self.iterations],
            "converged": self.converged,
            "chi2": self.chi2,
            "ndof": self.ndof,
        }


def _marginal_errors(data, tag, atom, geom, amplitude, corr_length, e_cutoff, step=1e-3):
    """Standard errors of (amplitude, corr_length) from the Poisson Fisher matrix."""
    s0, b = _design(data, shape_values(tag, atom, data.grid, corr_length, geom, e_cutoff))
    sp, _ = _design(data, shape_values(tag, atom, data.grid, corr_length * math.exp(step), geom, e_cutoff))
    sm, _ = _design(data, shape_values(tag, atom, data.grid, corr_length * math.exp(-step), geom, e_cutoff))
    mu = amplitude * s0 + b
    w = np.where(mu > 0, mu, np.maximum(data.counts.astype(float), 1.0))
    jac = np.column_stack([s0, amplitude * (sp - sm) / (2.0 * step)])
    fisher = jac.T @ (jac / w[:, None])
    try:
        cov = np.linalg.inv(fisher)
    except np.linalg.LinAlgError:
        return float("inf"), float("inf")
    if cov[0, 0] < 0 or cov[1, 1] < 0:
        return float("inf"), float("inf")
    return math.sqrt(cov[0, 0]), corr_length * math.sqrt(cov[1, 1])


UpdateRule = Callable[[float, float, FitDiagnostics], float]


def iterate_corr_length(data: SyntheticSpectrum, model_family: str, atom: Atom, geom: PairGeometry | None,
                        prior: float, update_rule: UpdateRule | None = None, rel_tol: float = 1e-3,
                        max_iter: int = 50, e_cutoff: float | None = None) -> FitResult:
    """Prior -> fit -> updated correlation length -> new prior, until stable.

    Each iteration fits the amplitude with the general shape at the current
    correlation length and maps ``(amplitude, corr_length, diagnostics)`` to
    the next correlation length through ``update_rule`` (profile-chi2
    minimization by default). The loop stops once the relative change drops
    below ``rel_tol`` (``converged=True``) or after ``max_iter`` updates.
    The returned amplitude is refitted at the final correlation length.
    """
    if not (math.isfinite(prior) and prior > 0):
        raise ValueError(f"prior must be positive, got {prior!r}")
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    family = model_family.lower()
    if family not in ("csl", "dp"):
        raise ValueError(f"unknown model family {model_family!r}")
    tag = ModelTag.CSL_GENERAL if family == "csl" else ModelTag.DP_GENERAL
    geom = geom or PairGeometry()
    update_rule = update_rule or ProfileChi2Update()

    trace = []
    current = float(prior)
    converged = False
    for k in range(max_iter):
        fit = fit_amplitude(data, tag, atom, current, geom, e_cutoff)
        diag = FitDiagnostics(data, tag, atom, geom, fit, k, e_cutoff)
        proposed = update_rule(fit.amplitude, current, diag)
        try:
            proposed = float(proposed)
        except (TypeError, ValueError):
            proposed = float("nan")
        if not (math.isfinite(proposed) and proposed > 0):
            raise IterationError(f"update rule returned {proposed!r} at iteration {k}", trace)
        trace.append((current, proposed))
        change = abs(proposed - current) / current
        current = proposed
        if change < rel_tol:
            converged = True
            break

    final = fit_amplitude(data, tag, atom, current, geom, e_cutoff)
    sigma_a, sigma_r = _marginal_errors(data, tag, atom, geom, final.amplitude, current, e_cutoff)
    return FitResult(
        amplitude_hat=final.amplitude,
        amplitude_sigma=sigma_a,
        corr_length_hat=current,
        iterations=trace,
        converged=converged,
        chi2=final.chi2,
        ndof=max(data.n_bins - 2, 1),
        model_family=family,
        amplitude_sigma_fixed=final.sigma,
        corr_length_sigma=sigma_r,
    )


def bin_widths(grid: EnergyGrid) -> np.ndarray:
    """Widths of non-overlapping bins centred on the grid points.

    Log grids with ratio ``q`` between centres get widths ``2 E (q - 1)/(q + 1)``,
    which tile the range exactly; other grids use the smaller neighbour spacing.
    """
    pts = grid.points
    if pts.size < 2:
        raise ValueError("need at least two bin centres to infer widths")
    if grid.spacing == "log":
        q = pts[1] / pts[0]
        return 2.0 * pts * (q - 1.0) / (q + 1.0)
    gaps = np.diff(pts)
    return np.minimum(np.concatenate(([gaps[0]], gaps)), np.concatenate((gaps, [gaps[-1]])))
