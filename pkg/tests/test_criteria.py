import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupling_lab.antenna import (LinkGeometry, UlaSpec, inter_array_coupling,
                                  intra_array_impedance, radiation_resistance)
from coupling_lab.criteria import (EvaluationOptions, Role, ScenarioPoint, Side,
                                   estimate_growth_exponent, evaluate_condition,
                                   fixed_aperture_term_bound, frobenius_lower_bound,
                                   general_condition, generalized_harmonic, lhs_closed_partial,
                                   link_network, miso_lhs, poisson_limit, toeplitz_frobenius)
from coupling_lab.errors import DomainError
from coupling_lab.multiport import PartitionedImpedance, TerminationSpec, random_instance

LAMBDA, L_DIP = 1e-3, 5e-5
K = 2 * math.pi / LAMBDA
Z_TERM = 186 - 31.6j
R_R = radiation_resistance(L_DIP, LAMBDA)
Z_RL = Z_TERM + R_R
D2, R2 = 1.0, 0.62 * math.sqrt(1.0 / LAMBDA)


def s1(n):
    return UlaSpec.with_spacing(n, LAMBDA / 2, L_DIP, LAMBDA)


def s2(n):
    return UlaSpec.with_aperture(n, D2, L_DIP, LAMBDA)


def dense_frobenius(ula, z_diag):
    return np.linalg.norm(intra_array_impedance(ula).shifted(z_diag).dense())


def test_general_condition_unilateral():
    rng = np.random.default_rng(0)
    net, term = random_instance(rng, 3, 3)
    sides = general_condition(net.unilateral(), term)
    assert sides.lhs == 0 and sides.margin_exact == math.inf


def test_general_condition_dense_recomputation():
    rng = np.random.default_rng(1)
    net, term = random_instance(rng, 3, 3)
    sides = general_condition(net, term)
    c = net.tr @ np.linalg.inv(term.z_load * np.eye(3) + net.rr) @ net.rt
    assert sides.lhs == pytest.approx(math.sqrt(np.sum(np.abs(c) ** 2)), rel=1e-12)
    gt = term.z_generator * np.eye(3) + net.tt
    assert sides.rhs_exact == pytest.approx(math.sqrt(np.sum(np.abs(gt) ** 2)), rel=1e-14)
    dual = general_condition(net, term, Side.RECEIVE)
    c2 = net.rt @ np.linalg.inv(gt) @ net.tr
    assert dual.lhs == pytest.approx(np.linalg.norm(c2), rel=1e-12)
    assert sides.rhs_bound is None and sides.margin_bound is None


def test_general_condition_rank_one_equals_miso_lhs():
    ula, link = s1(40), LinkGeometry(3.0)
    net = link_network(ula, link)
    term = TerminationSpec(Z_TERM, Z_TERM)
    z = inter_array_coupling(ula, link)
    assert general_condition(net, term).lhs == pytest.approx(miso_lhs(z, Z_RL), rel=1e-12)


def test_miso_lhs_definition():
    assert miso_lhs([1j], 2.0) == 0.5
    with pytest.raises(DomainError):
        miso_lhs([1.0], 0)


def test_miso_lhs_equals_series():
    ula, link = s1(300), LinkGeometry(55.0)
    series = R_R**2 / K**2 * math.fsum(1 / (55.0**2 + (n * ula.spacing) ** 2) for n in range(300))
    assert miso_lhs(inter_array_coupling(ula, link), Z_RL) == pytest.approx(series / abs(Z_RL), rel=1e-12)


def test_toeplitz_frobenius_small():
    assert toeplitz_frobenius([3 + 4j], 1) == 5.0
    a, b = 1 + 2j, 0.5 - 1j
    assert toeplitz_frobenius([a, b], 2) == pytest.approx(math.sqrt(2 * abs(a) ** 2 + 2 * abs(b) ** 2))
    with pytest.raises(DomainError):
        toeplitz_frobenius([1, 2, 3], 2)


@pytest.mark.parametrize("ula", [s1(200), s1(50), s2(200), s2(50)], ids=["s1-200", "s1-50", "s2-200", "s2-50"])
def test_toeplitz_frobenius_matches_dense(ula):
    row = intra_array_impedance(ula).shifted(Z_TERM).first_row
    assert toeplitz_frobenius(row, ula.n_elements) == pytest.approx(dense_frobenius(ula, Z_TERM), rel=1e-12)


@settings(max_examples=40)
@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=40))
def test_toeplitz_frobenius_property(row):
    row = np.array(row, dtype=complex)
    from scipy.linalg import toeplitz
    dense = np.linalg.norm(toeplitz(row, row))
    assert toeplitz_frobenius(row) == pytest.approx(dense, rel=1e-12, abs=1e-300)


def test_generalized_harmonic_values():
    assert generalized_harmonic(0, 2) == 0.0
    for q in (1, 2, 4, 6, 9):
        assert generalized_harmonic(1, q) == 1.0
    assert generalized_harmonic(3, 2) == pytest.approx(float(Fraction(49, 36)), rel=1e-16)
    exact = sum(Fraction(1, m**4) for m in range(1, 301))
    assert generalized_harmonic(300, 4) == pytest.approx(float(exact), rel=1e-16)


def test_generalized_harmonic_converges_to_zeta2():
    n = 10**6
    h = generalized_harmonic(n, 2)
    assert abs(h - math.pi**2 / 6) <= 1 / n
    # Euler-Maclaurin tail 1/n - 1/(2n^2) pins it much tighter
    assert h == pytest.approx(math.pi**2 / 6 - 1 / n + 1 / (2 * n * n), rel=1e-15)


def test_generalized_harmonic_domain():
    with pytest.raises(DomainError):
        generalized_harmonic(-1, 2)
    with pytest.raises(DomainError):
        generalized_harmonic(3, 0)


def test_frobenius_lower_bound_single():
    assert frobenius_lower_bound(s1(1), Z_TERM) == pytest.approx(abs(Z_TERM + R_R), rel=1e-15)


@pytest.mark.parametrize("ula", [s1(200), s2(200)], ids=["s1", "s2"])
def test_frobenius_lower_bound_matches_first_row(ula):
    row = intra_array_impedance(ula).shifted(Z_TERM).first_row
    assert frobenius_lower_bound(ula, Z_TERM) == pytest.approx(
        math.sqrt(ula.n_elements) * np.linalg.norm(row), rel=1e-12)
    assert frobenius_lower_bound(ula, TerminationSpec(Z_TERM, 50)) == frobenius_lower_bound(ula, Z_TERM)


@pytest.mark.parametrize("n", [2, 7, 64, 333, 512])
def test_row_one_is_minimum_row(n):
    for ula in (s1(n), s2(max(n, 2))):
        z = intra_array_impedance(ula).shifted(Z_TERM).dense()
        norms = np.linalg.norm(z, axis=1)
        assert norms[0] == pytest.approx(norms.min(), rel=1e-14)


@pytest.mark.parametrize("ula", [s1(n) for n in (1, 2, 10, 100, 1000, 5000, 20000)]
                         + [s2(n) for n in (2, 10, 100, 1000, 5000, 20000)],
                         ids=lambda u: f"{u.spacing_mode.value}-{u.n_elements}")
def test_bound_sandwich(ula):
    bound = frobenius_lower_bound(ula, Z_TERM)
    exact = toeplitz_frobenius(intra_array_impedance(ula).shifted(Z_TERM).first_row)
    assert bound <= exact * (1 + 1e-13)
    assert exact <= math.sqrt(2) * bound


def test_lhs_closed_partial_single_term():
    got = lhs_closed_partial(s1(1), LinkGeometry(55.0), Z_RL)
    assert got == pytest.approx(R_R**2 / (K**2 * 55.0**2 * abs(Z_RL)), rel=1e-14)


@pytest.mark.parametrize("make", [s1, s2], ids=["s1", "s2"])
def test_lhs_closed_partial_matches_vector_path(make):
    ula, link = make(1000), LinkGeometry(55.0)
    assert lhs_closed_partial(ula, link, Z_RL) == pytest.approx(
        miso_lhs(inter_array_coupling(ula, link), Z_RL), rel=1e-12)


def test_lhs_closed_partial_requires_broadside():
    with pytest.raises(DomainError):
        lhs_closed_partial(s1(10), LinkGeometry(5.0, 1.0), Z_RL)


def test_lhs_closed_partial_monotone_and_bounded():
    link = LinkGeometry(55.0)
    limit = poisson_limit(LAMBDA / 2, 55.0, LAMBDA, R_R, Z_RL)
    vals = [lhs_closed_partial(s1(n), link, Z_RL) for n in (1, 10, 100, 10**3, 10**4, 10**5, 10**6)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < limit


@pytest.mark.parametrize("ratio", [0.3, 1.0, 3.0, 12.0])
def test_poisson_limit_against_direct_series(ratio):
    # mpmath's nsum needs r/d of order one to converge quickly
    mpmath.mp.dps = 30
    d, k = 1.0, 2.0
    r = ratio * d
    series = mpmath.nsum(lambda n: 1 / (r**2 + (n * d) ** 2), [0, mpmath.inf])
    expect = float(series) * (R_R / k) ** 2 / abs(Z_RL)
    assert poisson_limit(d, r, 2 * math.pi / k, R_R, Z_RL) == pytest.approx(expect, rel=1e-12)


def test_poisson_limit_coth_saturation():
    d, r = 5e-4, 55.0
    sat = R_R**2 / abs(Z_RL) * (d + r * math.pi) / (2 * d * (r * K) ** 2)
    assert poisson_limit(d, r, LAMBDA, R_R, Z_RL) == sat
    # huge r/d must not overflow
    assert math.isfinite(poisson_limit(1e-9, 1e3, LAMBDA, R_R, Z_RL))
    with pytest.raises(DomainError):
        poisson_limit(0.0, 1.0, LAMBDA, R_R, Z_RL)


def test_poisson_gap_tail_estimate():
    link = LinkGeometry(55.0)
    limit = poisson_limit(LAMBDA / 2, 55.0, LAMBDA, R_R, Z_RL)
    n = 10**6
    gap = (limit - lhs_closed_partial(s1(n), link, Z_RL)) / limit
    assert gap == pytest.approx(2 * 55.0 / (math.pi * LAMBDA / 2 * n), rel=0.02)


def test_fixed_aperture_terms():
    n_el, r, k = 1001, R2, K
    a_last, floor = fixed_aperture_term_bound(n_el - 1, n_el, D2, r, R_R, k)
    assert a_last == floor
    a1, _ = fixed_aperture_term_bound(1, 10**9, D2, r, R_R, k)
    assert a1 == pytest.approx((R_R / k) ** 2 / r**2, rel=1e-15)
    terms = [fixed_aperture_term_bound(n, n_el, D2, r, R_R, k) for n in range(1, n_el)]
    assert math.fsum(a for a, _ in terms) >= (n_el - 1) * floor
    with pytest.raises(DomainError):
        fixed_aperture_term_bound(0, n_el, D2, r, R_R, k)


def test_growth_exponent_exact_power():
    samples = [(n, 3.7 * math.sqrt(n)) for n in (10, 100, 1000, 10**4)]
    fit = estimate_growth_exponent(samples)
    assert fit.exponent == pytest.approx(0.5, abs=1e-6)
    assert fit.residual < 1e-10 and fit.prefactor == pytest.approx(3.7)


def test_growth_exponent_window_and_domain():
    samples = [(n, float(n) ** 2) for n in (1, 2, 3, 4, 5)]
    assert estimate_growth_exponent(samples, (2, 4)).fit_window == (2, 4)
    with pytest.raises(DomainError):
        estimate_growth_exponent(samples, (2, 3))
    with pytest.raises(DomainError):
        estimate_growth_exponent([(1, 1.0), (2, 0.0), (3, 1.0)])


def test_fixed_spacing_rhs_grows_as_sqrt_n():
    ns = np.unique(np.rint(np.geomspace(1e5, 1e6, 6)).astype(int))
    fit = estimate_growth_exponent([(n, frobenius_lower_bound(s1(int(n)), Z_TERM)) for n in ns])
    assert 0.49 <= fit.exponent <= 0.51


def test_fixed_aperture_rhs_tends_to_3p5_once_coupling_dominates():
    # the diagonal |Z_GT|^2 term dominates until kd ~ 1, i.e. N ~ 2e4 for D = 1 m
    ns = np.unique(np.rint(np.geomspace(1e5, 1e6, 6)).astype(int))
    fit = estimate_growth_exponent([(n, frobenius_lower_bound(s2(int(n)), Z_TERM)) for n in ns])
    assert 3.45 <= fit.exponent <= 3.55


def test_fixed_aperture_lhs_grows_linearly():
    link = LinkGeometry(R2)
    ns = np.unique(np.rint(np.geomspace(1e5, 1e6, 6)).astype(int))
    fit = estimate_growth_exponent([(n, lhs_closed_partial(s2(int(n)), link, Z_RL)) for n in ns])
    assert 0.95 <= fit.exponent <= 1.05


def point(ula, r=55.0, role=Role.MISO, zg=Z_TERM, zl=Z_TERM, theta=math.pi / 2):
    return ScenarioPoint(ula, LinkGeometry(r, theta), TerminationSpec(zg, zl), role)


def test_evaluate_condition_scenario1_pass():
    rep = evaluate_condition(point(s1(1000)))
    assert rep.passed and rep.margin_bound >= 10
    assert rep.sides.rhs_bound <= rep.sides.rhs_exact
    assert rep.poisson_limit is not None and rep.lhs < rep.poisson_limit
    assert 1 <= rep.bound_ratio <= math.sqrt(2)


def test_evaluate_condition_cap_and_fixed_aperture():
    rep = evaluate_condition(point(s2(30000), R2), EvaluationOptions(rhs_exact_cap=20000))
    assert rep.sides.rhs_exact is None and rep.margin_exact is None and rep.bound_ratio is None
    assert rep.poisson_limit is None


def test_evaluate_condition_scenario2_margin_grows():
    assert (evaluate_condition(point(s2(10**5), R2)).margin_bound
            > evaluate_condition(point(s2(10**3), R2)).margin_bound)


def test_evaluate_condition_off_broadside_uses_vector_path():
    ula = s1(500)
    rep = evaluate_condition(point(ula, 2.0, theta=1.1))
    z = inter_array_coupling(ula, LinkGeometry(2.0, 1.1))
    assert rep.lhs == pytest.approx(miso_lhs(z, Z_RL), rel=1e-15)


def test_kernel_consistent_amplitude_scales_lhs():
    base = evaluate_condition(point(s1(100)))
    alt = evaluate_condition(point(s1(100)), EvaluationOptions(interarray_amplitude="kernel_consistent"))
    assert alt.lhs == pytest.approx(2.25 * base.lhs, rel=1e-14)
    assert alt.poisson_limit == pytest.approx(2.25 * base.poisson_limit, rel=1e-14)


def _fields(rep):
    return (rep.n, rep.spacing, rep.aperture, rep.sides, rep.poisson_limit, rep.threshold)


def test_simo_equal_terminations_matches_miso():
    miso = evaluate_condition(point(s1(300)))
    simo = evaluate_condition(point(s1(300), role=Role.SIMO))
    assert simo.role is Role.SIMO and _fields(simo) == _fields(miso)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 3000), st.floats(1.0, 500.0),
       st.complex_numbers(max_magnitude=300).filter(lambda z: z.real > 1),
       st.complex_numbers(max_magnitude=300).filter(lambda z: z.real > 1))
def test_duality(n, r, zg, zl):
    miso = evaluate_condition(point(s1(n), r, Role.MISO, zg, zl))
    simo = evaluate_condition(point(s1(n), r, Role.SIMO, zl, zg))
    assert _fields(miso) == _fields(simo)


def test_condition_tracks_accuracy_across_r_sweep():
    margins, errors = [], []
    from coupling_lab.multiport import unilateral_deviation

    for r in (55.0, 550.0, 5500.0):
        ula = s1(64)
        margins.append(evaluate_condition(point(ula, r)).margin_exact)
        errors.append(unilateral_deviation(link_network(ula, LinkGeometry(r)),
                                           TerminationSpec(Z_TERM, Z_TERM)))
    assert all(m >= 10 for m in margins)
    assert margins[0] < margins[1] < margins[2]
    assert errors[0] > errors[1] > errors[2]
    # same order as 1/margin, not a strict bound
    assert all(0.1 <= e * m <= 100 for e, m in zip(errors, margins))


def test_link_network_shapes():
    ula = s1(5)
    miso = link_network(ula, LinkGeometry(1.0))
    simo = link_network(ula, LinkGeometry(1.0), Role.SIMO)
    assert isinstance(miso, PartitionedImpedance)
    assert (miso.n_t, miso.n_r) == (5, 1) and (simo.n_t, simo.n_r) == (1, 5)
    assert miso.is_reciprocal() and simo.is_reciprocal()
