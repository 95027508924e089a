import math

import numpy as np
import pytest

from emdecay import (DecayCurve, H_l, H_l_zero, ModeAmplitudes, ProfileQuery,
                     TargetParams, asymptote_early_H_l, asymptote_late_H_l,
                     boundary_dH_dt, boundary_flux_residual, boundary_H,
                     derive_timescales, early_time_H_l, find_roots,
                     mode_profile_A, pde_residual, profile_H,
                     synthesize_response)

STEEL = TargetParams(mu_c=100.0, mu_b=1.0, sigma_c=1.0e7, L_c=0.05)

# profile values frozen from a 40-digit independent evaluation
FROZEN_PROFILE = [
    ((-1.0, 1.0, 0.0), 0.39928245674849133178),
    ((-0.5, 0.2, 5.0), 0.057913195726799918999),
    ((-1.0, 1.0, 2.0), 0.15766198038984959059),
    ((0.0, 2.5, 0.5), 1.0152382994896771311),
]
FROZEN_BOUNDARY = [((100.0, 10.0), 0.09943583862170105671),
                   ((0.25, 1.0), 0.38430965580707412513)]
FROZEN_DHDT_4_3 = 0.0037650883722630803056


@pytest.mark.parametrize("args,expected", FROZEN_PROFILE)
def test_profile_frozen_values(args, expected):
    Z, t, kappa = args
    assert profile_H(ProfileQuery(Z=Z, t=t, kappa=kappa)) == pytest.approx(expected, rel=1e-12)


def test_profile_continuous_through_kappa_zero():
    a = profile_H(ProfileQuery(Z=-0.7, t=1.3, kappa=0.0))
    b = profile_H(ProfileQuery(Z=-0.7, t=1.3, kappa=1e-9))
    assert b == pytest.approx(a, rel=1e-7)


def test_profile_decays_into_interior():
    Zs = np.linspace(0.0, -8.0, 40)
    vals = [profile_H(ProfileQuery(Z=z, t=0.8, kappa=2.0)) for z in Zs]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-10
    assert all(v >= 0 for v in vals)


def test_profile_no_overflow_at_extreme_kappa_t():
    # kappa^2 t ~ 1e8: naive exp(kappa^2 t) * erfc would overflow
    v = profile_H(ProfileQuery(Z=-0.1, t=100.0, kappa=1000.0))
    assert math.isfinite(v) and 0 < v < 1e-2


@pytest.mark.parametrize("args,expected", FROZEN_BOUNDARY)
def test_boundary_trace_frozen_values(args, expected):
    t, kappa = args
    assert boundary_H(t, kappa) == pytest.approx(expected, rel=1e-12)


def test_boundary_trace_matches_profile_at_zero():
    assert boundary_H(2.5, 0.5) == pytest.approx(
        profile_H(ProfileQuery(Z=0.0, t=2.5, kappa=0.5)), rel=1e-14)


def test_boundary_trace_limits():
    # early: sqrt(4t/pi) growth; late: saturation at 1/kappa
    t = 1e-10
    assert boundary_H(t, 3.0) == pytest.approx(math.sqrt(4 * t / math.pi), rel=1e-4)
    assert boundary_H(1e8, 3.0) == pytest.approx(1.0 / 3.0, rel=1e-4)
    assert boundary_H(0.3, 0.0) == pytest.approx(math.sqrt(4 * 0.3 / math.pi), rel=1e-14)


def test_boundary_rate_frozen_value():
    assert boundary_dH_dt(4.0, 3.0) == pytest.approx(FROZEN_DHDT_4_3, rel=1e-12)


def test_boundary_rate_crossover_slopes():
    kappa = 2.0
    tc = 1.0 / kappa ** 2
    # t^-1/2 regime well before crossover
    r = boundary_dH_dt(1e-6 * tc, kappa) / boundary_dH_dt(4e-6 * tc, kappa)
    assert r == pytest.approx(2.0, rel=5e-3)
    # t^-3/2 regime well after crossover
    r = boundary_dH_dt(1e4 * tc, kappa) / boundary_dH_dt(4e4 * tc, kappa)
    assert r == pytest.approx(8.0, rel=5e-3)


def test_boundary_rate_series_branch_continuous():
    # the cancellation-avoiding branch takes over at kappa sqrt(t) = 5e3
    kappa = 1.0
    below = boundary_dH_dt((4.999e3) ** 2, kappa)
    above = boundary_dH_dt((5.001e3) ** 2, kappa)
    assert above == pytest.approx(below * (4.999 / 5.001) ** 3, rel=1e-6)
    deep = boundary_dH_dt(1e12, 30.0)
    assert math.isfinite(deep) and deep > 0


def test_boundary_rate_positive_everywhere():
    t = np.geomspace(1e-9, 1e9, 60)
    for kappa in (0.0, 0.1, 5.0, 300.0):
        assert np.all(boundary_dH_dt(t, kappa) > 0)


def test_pde_residual_reference_point():
    assert abs(pde_residual(ProfileQuery(Z=-1.0, t=1.0, kappa=0.0), h=1e-4)) < 1e-6


def test_pde_residual_small_across_parameter_sweep():
    rng = np.random.default_rng(42)
    for _ in range(30):
        kappa = float(rng.choice([0.0, 0.5, 3.0, 20.0]))
        Z = float(rng.uniform(-3.0, -0.3))
        t = float(rng.uniform(0.05, 5.0))
        r = pde_residual(ProfileQuery(Z=Z, t=t, kappa=kappa), h=1e-4)
        assert abs(r) < 1e-5, (Z, t, kappa, r)


def test_pde_residual_rejects_boundary_hugging_points():
    with pytest.raises(ValueError):
        pde_residual(ProfileQuery(Z=-1e-9, t=1.0, kappa=0.0), h=1e-4)


def test_boundary_flux_residual_small():
    for t in (0.01, 1.0, 25.0):
        for kappa in (0.0, 1.0, 10.0):
            assert abs(boundary_flux_residual(t, kappa)) < 1e-4, (t, kappa)


def test_query_validation():
    with pytest.raises(ValueError):
        ProfileQuery(Z=0.1, t=1.0)
    with pytest.raises(ValueError):
        ProfileQuery(Z=-1.0, t=0.0)
    with pytest.raises(ValueError):
        ProfileQuery(Z=-1.0, t=1.0, kappa=-2.0)
    with pytest.raises(ValueError):
        boundary_H(-1.0, 2.0)
    with pytest.raises(ValueError):
        boundary_dH_dt(1.0, -2.0)


def test_early_model_starts_at_initial_value():
    d = derive_timescales(STEEL)
    for l in (1, 3):
        v = early_time_H_l(STEEL, l, 1e-20 * d.tau_c)
        assert v == pytest.approx(H_l_zero(l, STEEL.mu_ratio), rel=1e-6)


def test_early_model_tracks_exact_series_at_small_tau():
    d = derive_timescales(STEEL)
    spec = find_roots(1, STEEL.mu_ratio, N=400)
    for tau in (1e-6, 1e-5, 1e-4):
        exact = H_l(spec, tau).value
        approx = early_time_H_l(STEEL, 1, tau * d.tau_c)
        assert approx == pytest.approx(exact, rel=2e-2)


def test_asymptotes_bracket_the_model():
    d = derive_timescales(STEEL)
    kappa1 = 1.0 / math.sqrt(d.tau_mag)
    t_early = 1e-4 / kappa1 ** 2
    t_late = 1e3 / kappa1 ** 2
    h0 = H_l_zero(1, STEEL.mu_ratio)
    # drawdown-level agreement in each regime
    m, a = early_time_H_l(STEEL, 1, t_early), asymptote_early_H_l(STEEL, 1, t_early)
    assert (h0 - a) == pytest.approx(h0 - m, rel=2e-2)
    m, a = early_time_H_l(STEEL, 1, t_late), asymptote_late_H_l(STEEL, 1, t_late)
    assert a == pytest.approx(m, rel=2e-2)


def test_early_model_accepts_arrays():
    t = np.geomspace(1e-8, 1e-3, 11)
    v = early_time_H_l(STEEL, 2, t)
    assert v.shape == t.shape
    assert np.all(np.diff(v) < 0)


def test_mode_amplitudes_container():
    amp = ModeAmplitudes.from_parts(K1=[2.0, 0.5], kappa=[10.0, 20.0], K2=[0.3])
    assert amp.mode_ids == ("a1", "a2", "b1")
    v = mode_profile_A(amp, "a1", Z=-0.2, t=0.01)
    assert v == pytest.approx(-2.0 * profile_H(ProfileQuery(Z=-0.2, t=0.01, kappa=10.0)), rel=1e-14)
    # beta modes relax with the kappa = 0 profile
    vb = mode_profile_A(amp, "b1", Z=-0.2, t=0.01)
    assert vb == pytest.approx(-0.3 * profile_H(ProfileQuery(Z=-0.2, t=0.01, kappa=0.0)), rel=1e-14)
    with pytest.raises(KeyError):
        mode_profile_A(amp, "c1", Z=-0.2, t=0.01)
    with pytest.raises(ValueError):
        ModeAmplitudes.from_parts(K1=[1.0], kappa=[1.0, 2.0])
    with pytest.raises(ValueError):
        ModeAmplitudes.from_parts(K1=[1.0], kappa=[-1.0])


def test_decay_curve_validation():
    t = np.array([1.0, 2.0, 3.0])
    v = np.array([3.0, 2.0, 1.0])
    c = DecayCurve(times=t, values=v, model_tag="exact")
    assert c.model_tag == "exact"
    with pytest.raises(ValueError):
        DecayCurve(times=t, values=v, model_tag="guess")
    with pytest.raises(ValueError):
        DecayCurve(times=np.array([2.0, 1.0, 3.0]), values=v, model_tag="exact")
    with pytest.raises(ValueError):
        DecayCurve(times=t, values=v[:2], model_tag="exact")


def test_synthesize_response_single_mode():
    amp = ModeAmplitudes.from_parts(K1=[1.5], kappa=[4.0])
    t = np.geomspace(1e-4, 10.0, 25)
    curve = synthesize_response(amp, [2.0], t)
    assert curve.model_tag == "early"
    np.testing.assert_allclose(curve.values, 3.0 * boundary_dH_dt(t, 4.0), rtol=1e-14)
    with pytest.raises(ValueError):
        synthesize_response(amp, [1.0, 2.0], t)


def test_synthesize_response_superposes_linearly():
    amp = ModeAmplitudes.from_parts(K1=[1.0, 2.0], kappa=[3.0, 30.0])
    t = np.geomspace(1e-4, 1.0, 10)
    both = synthesize_response(amp, [1.0, 1.0], t).values
    first = synthesize_response(amp, [1.0, 0.0], t).values
    second = synthesize_response(amp, [0.0, 1.0], t).values
    np.testing.assert_allclose(both, first + second, rtol=1e-13)
