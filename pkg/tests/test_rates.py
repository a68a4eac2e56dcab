import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bruteforce
from collapse_radiance import (
    CslParams,
    DpParams,
    PairGeometry,
    csl_f_ij_extended,
    csl_f_ij_pointlike,
    csl_rate_general,
    csl_rate_longwave,
    csl_rate_simple,
    csl_structure_factor,
    dp_f_ij_gaussian,
    dp_overlap_integral,
    dp_rate_general,
    dp_rate_simple,
    dp_structure_factor,
)
from collapse_radiance.atoms import Atom, Shell
from collapse_radiance.csl import csl_prefactor
from collapse_radiance.dp import PENROSE_CONVENTION_FACTOR, dp_prefactor
from collapse_radiance.errors import QuadratureError, SemiclassicalValidityWarning
from collapse_radiance.kernels import check_energy, colored_filter, gaussian_angular_average, radial_quad

RC = 1.15e-8
R0 = 0.54e-10


# -- kernels ----------------------------------------------------------------

def test_colored_filter_values():
    assert colored_filter(5.0, 5.0) == 0.5
    assert colored_filter(1e-9, 5.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        colored_filter(0.0, 5.0)
    assert colored_filter(1e6, 1.0) == pytest.approx(1e-12)
    with pytest.raises(ValueError):
        colored_filter(1.0, 0.0)


def test_check_energy():
    with pytest.warns(SemiclassicalValidityWarning):
        check_energy(0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert check_energy(1.0) == 1.0
    for bad in (0.0, -1.0, math.nan, math.inf):
        with pytest.raises(ValueError):
            check_energy(bad)


def _angular_brute(u, d):
    from scipy.integrate import quad

    f = lambda mu: math.exp(-0.5 * (u * u + d * d - 2 * u * d * mu)) / (2 * math.pi) ** 1.5  # noqa: E731
    return quad(f, -1.0, 1.0, epsabs=0.0, epsrel=1e-12)[0] / 2


@pytest.mark.parametrize("u, d", [(0.0, 0.0), (0.3, 0.0), (1.0, 1.0), (2.5, 0.7), (30.0, 29.0)])
def test_gaussian_angular_average_matches_direct_integral(u, d):
    assert gaussian_angular_average(u, d) == pytest.approx(_angular_brute(u, d), rel=1e-6, abs=1e-300)


def test_gaussian_angular_average_normalized():
    from scipy.integrate import quad

    for d in (0.0, 1.0, 4.0):
        total, _ = quad(lambda u: 4 * math.pi * u * u * float(gaussian_angular_average(u, d)), 0, d + 15)
        assert total == pytest.approx(1.0, rel=1e-10)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_radial_quad_raises_below_target():
    with pytest.raises(QuadratureError) as info:
        radial_quad(lambda x: math.sin(1e4 * x) / (x + 1e-9), 0.0, 50.0, target=1e-14)
    assert info.value.achieved > info.value.target


# -- CSL --------------------------------------------------------------------

def test_csl_params_validation():
    for bad in ({"lambda_rate": -1.0, "r_c": RC}, {"lambda_rate": 1.0, "r_c": 0.0},
                {"lambda_rate": 1.0, "r_c": RC, "e_cutoff": -1.0}):
        with pytest.raises(ValueError):
            CslParams(**bad)


def test_csl_pointlike_kernel_zero_and_origin():
    assert csl_f_ij_pointlike(0.0, RC, 1.0, 1.0) == pytest.approx(3 / (2 * RC * RC))
    assert csl_f_ij_pointlike(math.sqrt(6) * RC, RC, 1.0, 1.0) == pytest.approx(0.0, abs=1e-6 / RC**2)


def _smeared_exact(w, d, rc):
    # Gaussian smearing of K = -2 rc^2 Laplacian(exp(-r^2/4rc^2)) is analytic
    s2 = 2 * w * w
    delta = s2 / (2 * rc * rc)
    rc2 = rc * rc * (1 + delta)
    return (1 + delta) ** -2.5 / (2 * rc * rc) * math.exp(-d * d / (4 * rc2)) * (3 - d * d / (2 * rc2))


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("wf", [1e-3, 0.1, 0.7])
def test_csl_extended_matches_analytic_smearing(x, wf):
    got = csl_f_ij_extended(wf * RC, wf * RC, x * RC, RC, 1.0, 1.0)
    want = _smeared_exact(wf * RC, x * RC, RC)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-9 * 3 / (2 * RC * RC))


def test_csl_extended_converges_quadratically_to_pointlike():
    point = csl_f_ij_pointlike(0.0, RC, 1.0, 1.0)
    errs = [abs(csl_f_ij_extended(w * RC, w * RC, 0.0, RC, 1.0, 1.0) / point - 1) for w in (1e-2, 1e-3)]
    assert errs[0] / errs[1] == pytest.approx(100.0, rel=1e-3)


def test_csl_extended_degenerate_inputs():
    assert csl_f_ij_extended(0.0, 0.0, RC, RC, 2.0, 3.0) == csl_f_ij_pointlike(RC, RC, 2.0, 3.0)
    assert csl_f_ij_extended(1e-10, 1e-10, RC, RC, 0.0, 3.0) == 0.0
    with pytest.raises(ValueError):
        csl_f_ij_extended(-1.0, 0.0, RC, RC, 1.0, 1.0)


def test_csl_simple_rate_formula(ge):
    e = 25.0
    p = CslParams(1e-9, RC)
    want = 3 * csl_prefactor(1e-9, RC) * (32**2 + 32) / e
    assert csl_rate_simple(ge, e, p) == pytest.approx(want, rel=1e-14)
    assert csl_rate_longwave(ge, e, p) == 0.0


def test_csl_prefactor_value():
    # hbar e^2 / (12 pi^2 eps0 c^3 m0^2) at lambda = 1/s, r_C = 1 m
    val = csl_prefactor(1.0, 1.0)
    hand = 1.054571817e-34 * 1.602176634e-19**2 / (
        12 * math.pi**2 * 8.8541878128e-12 * 299792458.0**3 * 1.66053906660e-27**2)
    assert val == pytest.approx(hand, rel=1e-14)


def test_csl_general_converges_to_simple_at_high_energy(ge):
    p = CslParams(1.0, RC)
    ratio = csl_rate_general(ge, 5e4, p) / csl_rate_simple(ge, 5e4, p)
    assert ratio == pytest.approx(1.0, abs=2e-3)


def test_csl_longwave_limit_of_ion():
    ion = Atom("X", 3, (Shell("1s", 2, 1e-11),), neutral=False)
    p = CslParams(1.0, 1.0)
    with pytest.warns(SemiclassicalValidityWarning):
        general = csl_rate_general(ion, 1e-6, p)
        longwave = csl_rate_longwave(ion, 1e-6, p)
    assert general == pytest.approx(longwave, rel=1e-9)


@given(st.floats(1e-12, 1e-6), st.floats(1.0, 1e3))
@settings(max_examples=25, deadline=None)
def test_csl_rate_linear_in_lambda(lam, e):
    from collapse_radiance import builtin_atom

    ge = builtin_atom("Ge")
    one = csl_rate_general(ge, e, CslParams(1.0, RC))
    assert csl_rate_general(ge, e, CslParams(lam, RC)) == pytest.approx(lam * one, rel=1e-13)


def test_csl_rate_factorizes_into_prefactor_structure(ge):
    e = 7.0
    got = csl_rate_general(ge, e, CslParams(2e-9, RC))
    assert got == pytest.approx(csl_prefactor(2e-9, RC) * csl_structure_factor(ge, e, RC) / e, rel=1e-14)


def test_csl_colored_filter_applied(ge):
    white = csl_rate_general(ge, 30.0, CslParams(1.0, RC))
    colored = csl_rate_general(ge, 30.0, CslParams(1.0, RC, 10.0))
    assert colored == pytest.approx(white * 0.1, rel=1e-14)


def test_alpha_moves_spectrum_only_through_same_shell(ge):
    a = csl_structure_factor(ge, 5.0, RC, PairGeometry(1.0, 1.04))
    b = csl_structure_factor(ge, 5.0, RC, PairGeometry(1.5, 1.04))
    assert a != b


# -- DP ---------------------------------------------------------------------

def test_dp_params_validation():
    with pytest.raises(ValueError):
        DpParams(0.0)
    with pytest.raises(ValueError):
        DpParams(R0, g_scale=-1.0)


def test_penrose_convention_factor():
    assert PENROSE_CONVENTION_FACTOR == pytest.approx(8 * math.pi)


@pytest.mark.parametrize("x", [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 8.0])
def test_dp_overlap_integral_matches_closed_form(x):
    assert dp_overlap_integral(x * R0, R0) == pytest.approx(dp_f_ij_gaussian(x * R0, R0), rel=1e-10)


def test_dp_simple_rate_formula(xe):
    e = 12.0
    want = dp_prefactor(R0) * (54**2 + 54) / e
    assert dp_rate_simple(xe, e, DpParams(R0)) == pytest.approx(want, rel=1e-14)


def test_dp_g_scale_is_linear(ge):
    base = dp_rate_general(ge, 9.0, DpParams(R0))
    assert dp_rate_general(ge, 9.0, DpParams(R0, g_scale=8 * math.pi)) == pytest.approx(8 * math.pi * base, rel=1e-14)


def test_dp_general_to_simple_at_high_energy(ge):
    ratio = dp_rate_general(ge, 5e4, DpParams(R0)) / dp_rate_simple(ge, 5e4, DpParams(R0))
    assert ratio == pytest.approx(1.0, abs=2e-3)


def test_dp_structure_factor_decreasing_r0_removes_interference(ge):
    # with R0 far below every pair distance only the d = 0 terms survive
    s = dp_structure_factor(ge, 1e-6, 1e-16)
    assert s == pytest.approx(32**2 + 32, rel=1e-12)


# -- brute force ------------------------------------------------------------

@pytest.mark.parametrize("energy", [1.0, 3.3, 47.0, 1000.0])
@pytest.mark.parametrize("geom", [PairGeometry(), PairGeometry(1.0, 1.0), PairGeometry(1.5, 0.9)])
def test_general_rates_match_particle_sum(hydrogen, toy_atom, energy, geom):
    for atom in (hydrogen, toy_atom):
        got = csl_rate_general(atom, energy, CslParams(1e-9, RC), geom)
        want = bruteforce.csl_rate(atom, energy, 1e-9, RC, geom.alpha, geom.beta)
        assert got == pytest.approx(want, rel=1e-10)
        got = dp_rate_general(atom, energy, DpParams(R0), geom)
        want = bruteforce.dp_rate(atom, energy, R0, geom.alpha, geom.beta)
        assert got == pytest.approx(want, rel=1e-10)
