import math

import numpy as np
import pytest

from emdecay import (H_l, H_l_zero, SphereSpectrum, TargetParams,
                     characteristic_residual, derive_timescales, find_roots,
                     initial_screening_sphere, sphere_mode_labels)

# roots of the transcendental decay-rate equation, frozen from a 40-digit
# independent bisection (mpmath) at development time
FROZEN_ROOTS = {
    (1, 5.0): [3.8288618654448977084, 6.7804181515079231312],
    (1, 100.0): [4.448946367685209349, 7.6489063808952777021],
    (2, 5.0): [5.2706930217216621575],
    (2, 100.0): [5.7347916643915322939],
    (1, 0.3): [2.8823586100976939075],
    (5, 5.0): [9.0050696631016802504],
}
FROZEN_A1 = {
    (1, 5.0): 0.34365026331931930785,
    (1, 100.0): 0.0019562688760668941056,
    (2, 5.0): 0.21080711586497539363,
}
# full-series reference values at contrast 1 (coefficients exactly 1)
FROZEN_H1_M1 = {1e-4: 0.1610747708311891038, 0.01: 0.11524770831189103797,
                0.1: 0.038253543662339465127, 1.0: 5.2406544479234794199e-6}
FROZEN_H2_M1 = {0.01: 0.053178322900395263424, 0.1: 0.0066191568287884049223}


@pytest.mark.parametrize("key,expected", sorted(FROZEN_ROOTS.items()))
def test_roots_match_frozen_oracle(key, expected):
    l, m = key
    spec = find_roots(l, m, N=len(expected) + 3)
    np.testing.assert_allclose(spec.roots[:len(expected)], expected, rtol=1e-12)


@pytest.mark.parametrize("key,expected", sorted(FROZEN_A1.items()))
def test_first_coefficient_matches_frozen_oracle(key, expected):
    l, m = key
    spec = find_roots(l, m, N=3)
    assert spec.coefficients[0] == pytest.approx(expected, rel=1e-10)


def test_residual_small_at_every_root():
    for l in (1, 2, 3, 5):
        for m in (0.3, 1.0, 5.0, 100.0):
            spec = find_roots(l, m, N=40)
            res = np.abs(characteristic_residual(l, m, spec.roots))
            assert np.max(res) < 1e-12


def test_contrast_one_reduces_to_bessel_zeros():
    # at mu_c = mu_b the l=1 equation degenerates to j_0(z) = 0,
    # so roots are n*pi and every coefficient is exactly 1
    spec = find_roots(1, 1.0, N=20)
    n = np.arange(1, 21)
    np.testing.assert_allclose(spec.roots, n * math.pi, rtol=1e-11)
    np.testing.assert_allclose(spec.coefficients, 1.0, rtol=1e-9)


def test_roots_increasing_with_sane_spacing():
    for l, m in ((1, 100.0), (4, 5.0), (2, 0.5)):
        spec = find_roots(l, m, N=60)
        d = np.diff(spec.roots)
        assert np.all(d > 0.5)
        assert np.all(d < 2 * math.pi)
        # spacing settles toward pi at large overtone index
        assert abs(d[-1] - math.pi) < 0.2


def test_coefficients_positive_and_bounded():
    for l, m in ((1, 1.0), (1, 5.0), (2, 100.0), (3, 0.3)):
        spec = find_roots(l, m, N=80)
        assert np.all(spec.coefficients > 0)
        assert np.all(spec.coefficients < 1.6)


def test_h_zero_closed_form():
    assert H_l_zero(1, 1.0) == pytest.approx(1.0 / 6.0, rel=1e-15)
    assert H_l_zero(1, 100.0) == pytest.approx(1.0 / 204.0, rel=1e-15)
    assert H_l_zero(2, 5.0) == pytest.approx(1.0 / 26.0, rel=1e-15)


@pytest.mark.parametrize("l,m", [(1, 1.0), (1, 5.0), (1, 100.0), (2, 5.0), (3, 0.3)])
def test_series_completeness_recovers_initial_value(l, m):
    # sum a_n / zeta_n^2 must converge to the closed-form H_l(0);
    # this ties the root equation, the coefficients and H_l(0) together
    spec = find_roots(l, m, N=400)
    sv = H_l(spec, 0.0)
    err = abs(sv.value - H_l_zero(l, m))
    assert err <= sv.tail_bound
    # the bound is tight, not vacuous: within an order of magnitude
    assert sv.tail_bound < 10.0 * err + 1e-9


@pytest.mark.parametrize("tau,expected", sorted(FROZEN_H1_M1.items()))
def test_series_value_l1_contrast1(tau, expected):
    spec = find_roots(1, 1.0, N=250)
    assert H_l(spec, tau).value == pytest.approx(expected, rel=1e-9, abs=1e-18)


@pytest.mark.parametrize("tau,expected", sorted(FROZEN_H2_M1.items()))
def test_series_value_l2_contrast1(tau, expected):
    spec = find_roots(2, 1.0, N=250)
    assert H_l(spec, tau).value == pytest.approx(expected, rel=1e-9)


def test_tail_bound_is_a_true_bound():
    # compare a short truncation against a much longer one
    long = find_roots(1, 5.0, N=420)
    short = find_roots(1, 5.0, N=30)
    for tau in (0.0, 1e-5, 1e-3, 1e-2, 0.1):
        sv = H_l(short, tau)
        ref = H_l(long, tau).value
        assert abs(sv.value - ref) <= sv.tail_bound
    # and the bound is not absurdly loose at moderate tau
    sv = H_l(short, 1e-3)
    ref = H_l(long, 1e-3).value
    assert sv.tail_bound < 50 * max(abs(sv.value - ref), 1e-300)


def test_tail_bound_single_root_path():
    spec = find_roots(1, 5.0, N=1)
    sv = H_l(spec, 0.01)
    assert sv.tail_bound > 0 and math.isfinite(sv.tail_bound)


def test_series_monotone_decreasing_in_tau():
    spec = find_roots(2, 100.0, N=150)
    taus = np.geomspace(1e-6, 2.0, 40)
    vals = [H_l(spec, t).value for t in taus]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(v > 0 for v in vals)


def test_input_validation():
    with pytest.raises(ValueError):
        find_roots(0, 5.0)
    with pytest.raises(ValueError):
        find_roots(1, 0.0)
    with pytest.raises(ValueError):
        find_roots(1, 5.0, N=0)
    with pytest.raises(ValueError):
        H_l_zero(0, 5.0)
    spec = find_roots(1, 5.0, N=2)
    with pytest.raises(ValueError):
        H_l(spec, -0.1)


def test_spectrum_record_validates_roots():
    with pytest.raises(ValueError):
        SphereSpectrum(l=1, mu_ratio=5.0, roots=np.array([2.0, 1.0]),
                       coefficients=np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        SphereSpectrum(l=1, mu_ratio=5.0, roots=np.array([1.0, 2.0]),
                       coefficients=np.array([1.0]))


def test_mode_labels_table():
    p = TargetParams(mu_c=100.0, mu_b=1.0, sigma_c=1.0e7, L_c=0.05)
    d = derive_timescales(p)
    labels = sphere_mode_labels(p, 3)
    assert len(labels) == 3 + 5 + 7
    first = labels[0]
    assert (first.l, first.m) == (1, -1)
    assert first.kappa_lm == pytest.approx(1.0 / math.sqrt(d.tau_mag), rel=1e-14)
    assert first.L_lm == pytest.approx(0.05, rel=1e-14)
    l2 = [lab for lab in labels if lab.l == 2][0]
    assert l2.kappa_lm == pytest.approx(2.0 / math.sqrt(d.tau_mag), rel=1e-14)
    assert l2.lambda_lm == pytest.approx(6.0 / (0.05 ** 2 * 100.0 * math.sqrt(d.D_c)), rel=1e-14)
    assert l2.L_lm == pytest.approx(0.025, rel=1e-14)
    # kappa and 1/L scale the same way with l
    for lab in labels:
        assert lab.kappa_lm * lab.L_lm == pytest.approx(
            labels[0].kappa_lm * labels[0].L_lm, rel=1e-13)


def test_screening_current_contrast_independent():
    for mu_c in (1.0, 5.0, 100.0, 1e4):
        p = TargetParams(mu_c=mu_c, mu_b=1.0, sigma_c=1e7, L_c=0.05)
        sc = initial_screening_sphere(p, H0=2.0)
        assert sc.amplitude == pytest.approx(3.0, rel=1e-15)
        assert sc(math.pi / 2) == pytest.approx(3.0, rel=1e-15)
        assert sc(0.0) == pytest.approx(0.0, abs=1e-15)
        assert sc.H_interior == pytest.approx(6.0 / (mu_c + 2.0), rel=1e-14)


def test_screening_current_flux_consistency():
    # the tangential-H jump at the equator must equal the surface current:
    # H_theta(out) - H_theta(in) = K_phi, with the exterior dipole field
    p = TargetParams(mu_c=100.0, mu_b=1.0, sigma_c=1e7, L_c=0.05)
    sc = initial_screening_sphere(p, H0=1.0)
    r = p.L_c
    H_theta_out = sc.dipole_coefficient / r ** 3  # dipole tangential field at theta=pi/2
    H_theta_in = -sc.H_interior  # uniform interior field, tangential projection
    assert H_theta_out - H_theta_in == pytest.approx(sc.amplitude, rel=1e-12)


def test_screening_rejects_other_geometry():
    p = TargetParams(mu_c=100.0, mu_b=1.0, sigma_c=1e7, L_c=0.05)
    with pytest.raises(ValueError):
        initial_screening_sphere(p, 1.0, geometry="cube")
