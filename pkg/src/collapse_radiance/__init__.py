"""Spontaneous X-ray emission of atoms under CSL and Diosi-Penrose collapse models."""

__version__ = "0.1.0"

from .atoms import Atom, PairGeometry, PairKind, PairTerm, Shell, builtin_atom, enumerate_pairs, load_atom, parse_atom
from .csl import (
    CslParams,
    colored_filter,
    csl_f_ij_extended,
    csl_f_ij_pointlike,
    csl_rate_general,
    csl_rate_longwave,
    csl_rate_simple,
    csl_structure_factor,
)
from .dp import (
    PENROSE_CONVENTION_FACTOR,
    DpParams,
    dp_f_ij_gaussian,
    dp_overlap_integral,
    dp_rate_general,
    dp_rate_simple,
    dp_structure_factor,
)
from .spectra import (
    EnergyGrid,
    ModelTag,
    Spectrum,
    alpha_band,
    cancellation_factor,
    compute_spectrum,
    convergence_energy,
    normalize_shape,
    z_survey,
)
from .inference import FitResult, SyntheticSpectrum, fit_amplitude, iterate_corr_length, synth_counts
