import math

import numpy as np
import pytest
from scipy.optimize import brentq

from fiberspdc import (
    FiberChannel,
    GridResolutionError,
    band_limited,
    default_grid,
    delay_state_from_kappa,
    envelope_fwhm,
    g1_sampled,
    g2_analyzer_analytic,
    g2_pm_analytic,
    g2_plate_analytic,
    g2_unpolarized,
    jitter_convolve,
    propagate_exact,
    propagate_farfield,
    sample_spectral,
    sinc_spectral_amplitude,
    spread_scale,
    suggest_propagation_grid,
    to_frequency_domain,
    to_time_domain,
)
from fiberspdc.analysis import fwhm
from fiberspdc.polarization import AnalyzerSettings

DEG = math.pi / 180.0


def _apodized(source, lobes=2.5):
    return band_limited(
        lambda w: sinc_spectral_amplitude(source, w), omega_edge=lobes * math.pi / source.tau0
    )


def test_spread_scale_values(source, fiber_1km, fiber_240m):
    # 2 k'' z / tau0 with k'' = 3.2e-28 s^2/cm
    assert spread_scale(source, fiber_1km).tau_f == pytest.approx(1.6e-9, rel=1e-12)
    assert spread_scale(source, fiber_240m).tau_f == pytest.approx(0.384e-9, rel=1e-12)


def test_spread_scale_linear_in_length(source, fiber_1km):
    double = FiberChannel(length_cm=2e5, gvd_s2_per_cm=3.2e-28)
    assert spread_scale(source, double).tau_f == pytest.approx(
        2 * spread_scale(source, fiber_1km).tau_f, rel=1e-12
    )


def test_spread_scale_records_group_delay_shift(source):
    fiber = FiberChannel(length_cm=1e5, gvd_s2_per_cm=3.2e-28, group_delay_s_per_cm=5e-11)
    assert spread_scale(source, fiber).tau_shift == pytest.approx(5e-6, rel=1e-12)


def test_fiber_invariants():
    with pytest.raises(ValueError):
        FiberChannel(length_cm=-1.0, gvd_s2_per_cm=1e-28)


def test_propagate_zero_length_is_identity(source):
    grid = default_grid(source)
    a = sample_spectral(lambda w: sinc_spectral_amplitude(source, w), grid)
    out = propagate_exact(a, FiberChannel(length_cm=0.0, gvd_s2_per_cm=3.2e-28))
    direct = to_time_domain(a)
    assert np.allclose(out.values, direct.values, rtol=0, atol=1e-15)


def test_propagate_preserves_norm(source, fiber_1km):
    grid = suggest_propagation_grid(source, fiber_1km)
    a = sample_spectral(_apodized(source), grid)
    out = propagate_exact(a, fiber_1km)
    assert out.norm_squared() == pytest.approx(a.norm_squared(), rel=1e-9)


def test_propagate_rejects_undersized_grid(source, fiber_1km):
    a = sample_spectral(lambda w: sinc_spectral_amplitude(source, w), default_grid(source))
    with pytest.raises(GridResolutionError):
        propagate_exact(a, fiber_1km)


def test_exact_spread_width_1km(source, fiber_1km):
    # |output|^2 of the spread amplitude: FWHM = 2.7831 * tau_f = 4.453 ns
    grid = suggest_propagation_grid(source, fiber_1km)
    out = propagate_exact(sample_spectral(_apodized(source), grid), fiber_1km)
    width = fwhm(out.axis(), np.abs(out.values) ** 2)
    assert width == pytest.approx(4.453e-9, rel=0.02)
    assert width == pytest.approx(envelope_fwhm(source, fiber_1km), rel=0.02)


def test_farfield_matches_mapped_sinc(source, fiber_1km):
    tau = np.linspace(-6e-9, 6e-9, 2001)
    vals = propagate_farfield(
        lambda w: sinc_spectral_amplitude(source, w), source, fiber_1km, tau
    )
    chirp = fiber_1km.chirp_s2
    tau_f = spread_scale(source, fiber_1km).tau_f
    want = np.sinc(tau / tau_f / math.pi) ** 2 / (4 * math.pi * chirp)
    assert np.allclose(np.abs(vals) ** 2, want, rtol=1e-10)


def test_farfield_zero_chirp_raises(source):
    with pytest.raises(ZeroDivisionError):
        propagate_farfield(
            lambda w: sinc_spectral_amplitude(source, w),
            source,
            FiberChannel(length_cm=0.0, gvd_s2_per_cm=3.2e-28),
            0.0,
        )


def test_farfield_warns_when_marginal(source):
    short = FiberChannel(length_cm=1.0, gvd_s2_per_cm=3.2e-28)
    with pytest.warns(UserWarning, match="marginal"):
        propagate_farfield(lambda w: sinc_spectral_amplitude(source, w), source, short, 0.0)


def _farfield_exact_l2(source, fiber):
    grid = suggest_propagation_grid(source, fiber)
    f = _apodized(source)
    out = propagate_exact(sample_spectral(f, grid), fiber)
    taus = out.axis()
    exact = np.abs(out.values) ** 2
    ff = np.abs(propagate_farfield(f, source, fiber, taus)) ** 2
    exact /= np.trapezoid(exact, taus)
    ff /= np.trapezoid(ff, taus)
    return math.sqrt(np.trapezoid((exact - ff) ** 2, taus) / np.trapezoid(ff**2, taus))


def test_farfield_agrees_with_exact_and_converges(source):
    lengths = [2.4e4, 5.0e4, 1.0e5]
    errors = [
        _farfield_exact_l2(source, FiberChannel(length_cm=z, gvd_s2_per_cm=3.2e-28))
        for z in lengths
    ]
    assert errors[-1] < 0.01  # 1 km
    assert errors[0] > errors[1] > errors[2]  # monotone in length


def test_spread_240m_width_with_response(source, fiber_240m):
    # sinc^2 width 1.07 ns; a 0.8 ns response brings it to ~1.3 ns
    tau = np.linspace(-12e-9, 12e-9, 2**14)
    prof = g2_unpolarized(source, fiber_240m, tau)
    assert fwhm(tau, prof) == pytest.approx(1.0687e-9, rel=0.01)
    conv = jitter_convolve(tau, prof, 0.8e-9)
    assert fwhm(tau, conv) == pytest.approx(1.3e-9, abs=0.1e-9)


def test_semigroup_property(source):
    k = 3.2e-28
    fib_a = FiberChannel(length_cm=3e4, gvd_s2_per_cm=k)
    fib_b = FiberChannel(length_cm=7e4, gvd_s2_per_cm=k)
    fib_ab = FiberChannel(length_cm=1e5, gvd_s2_per_cm=k)
    grid = suggest_propagation_grid(source, fib_ab)
    a = sample_spectral(_apodized(source), grid)
    stepwise = propagate_exact(to_frequency_domain(propagate_exact(a, fib_a)), fib_b)
    direct = propagate_exact(a, fib_ab)
    err = np.max(np.abs(stepwise.values - direct.values)) / np.max(np.abs(direct.values))
    assert err < 1e-9


def test_dispersion_cancellation(source, fiber_1km):
    # pure spectral phase: |F(omega)| and the first-order correlation are untouched
    grid = suggest_propagation_grid(source, fiber_1km)
    a = sample_spectral(_apodized(source), grid)
    after = to_frequency_domain(propagate_exact(a, fiber_1km))
    scale = np.max(np.abs(a.values))
    assert np.max(np.abs(np.abs(after.values) - np.abs(a.values))) < 1e-12 * scale
    taus = np.linspace(-3 * source.tau0, 3 * source.tau0, 31)
    g_before = g1_sampled(a, taus)
    g_after = g1_sampled(after, taus)
    assert np.max(np.abs(g_before - g_after)) < 1e-12


# --- analytic spread correlation functions ---------------------------------


def test_g2_limits_at_center(source, fiber_1km):
    assert g2_pm_analytic(source, fiber_1km, -1, 1.0, 0.0) == pytest.approx(0.0, abs=1e-30)
    assert g2_pm_analytic(source, fiber_1km, +1, 1.0, 0.0) == pytest.approx(1.0, rel=1e-9)
    tau = np.linspace(-8e-9, 8e-9, 4001)
    gp = g2_pm_analytic(source, fiber_1km, +1, 1.0, tau)
    assert gp.max() == pytest.approx(1.0, rel=1e-6)


def test_g2_sum_rule(source, fiber_1km):
    tau = np.linspace(-10e-9, 10e-9, 4001)
    tau_f = spread_scale(source, fiber_1km).tau_f
    envelope = np.sinc(tau / tau_f / math.pi) ** 2
    for kappa in (1.0, 0.5, 1.75):
        delay = delay_state_from_kappa(source, kappa)
        total = g2_plate_analytic(source, fiber_1km, delay, +1, 1.0, tau) + (
            g2_plate_analytic(source, fiber_1km, delay, -1, 1.0, tau)
        )
        assert np.allclose(total, envelope, rtol=1e-12, atol=1e-12)


def test_unpolarized_is_twice_the_pairing_sum(source, fiber_1km):
    tau = np.linspace(-10e-9, 10e-9, 1001)
    total = g2_pm_analytic(source, fiber_1km, +1, 1.0, tau) + g2_pm_analytic(
        source, fiber_1km, -1, 1.0, tau
    )
    assert np.allclose(g2_unpolarized(source, fiber_1km, tau), 2.0 * total, rtol=1e-12)


def test_g2_nonnegative(source, fiber_1km, rng):
    tau = rng.uniform(-2e-8, 2e-8, size=2048)
    for kappa in (0.0, 0.3, 1.0, 2.5):
        delay = delay_state_from_kappa(source, kappa)
        for sign in (+1, -1):
            for v in (1.0, 0.7, 0.0):
                vals = g2_plate_analytic(source, fiber_1km, delay, sign, v, tau)
                assert np.all(vals >= -1e-15)


def test_drift_scales_only_the_cross_term(source, fiber_1km):
    tau = np.linspace(-8e-9, 8e-9, 801)
    v = 0.63
    gp1 = g2_pm_analytic(source, fiber_1km, +1, 1.0, tau)
    gm1 = g2_pm_analytic(source, fiber_1km, -1, 1.0, tau)
    gpv = g2_pm_analytic(source, fiber_1km, +1, v, tau)
    gmv = g2_pm_analytic(source, fiber_1km, -1, v, tau)
    assert np.allclose(gpv - gmv, v * (gp1 - gm1), rtol=1e-12, atol=1e-15)
    assert np.allclose(gpv + gmv, gp1 + gm1, rtol=1e-12, atol=1e-15)


def _zero_positions(profile, tau_f, candidates, width):
    """Locate double zeros of a nonnegative profile via its numerical slope."""
    positions = []
    h = 1e-7 * tau_f
    slope = lambda t: (profile(t + h) - profile(t - h)) / (2 * h)
    for c in candidates:
        positions.append(brentq(slope, c - width, c + width, xtol=1e-18, rtol=8.9e-16))
    return np.array(positions)


def test_interference_zero_positions(source, fiber_1km):
    tau_f = spread_scale(source, fiber_1km).tau_f
    # constructive pairing: zeros at n*pi/2*tau_f, n >= 1
    gp = lambda t: g2_pm_analytic(source, fiber_1km, +1, 1.0, t)
    want_p = np.arange(1, 7) * math.pi / 2 * tau_f
    got_p = _zero_positions(gp, tau_f, want_p, 0.2 * tau_f)
    assert np.max(np.abs(got_p / want_p - 1.0)) < 1e-6
    assert np.max([gp(t) for t in got_p]) < 1e-12
    # destructive pairing: zeros at n*pi*tau_f
    gm = lambda t: g2_pm_analytic(source, fiber_1km, -1, 1.0, t)
    want_m = np.arange(1, 4) * math.pi * tau_f
    got_m = _zero_positions(gm, tau_f, want_m, 0.3 * tau_f)
    assert np.max(np.abs(got_m / want_m - 1.0)) < 1e-6
    # the zero spacing of the two patterns differs by exactly two
    assert (want_m[1] - want_m[0]) / (want_p[1] - want_p[0]) == pytest.approx(2.0)


def test_plate_modulation_period_doubles_at_half_kappa(source, fiber_1km):
    tau_f = spread_scale(source, fiber_1km).tau_f

    def modulation_zeros(kappa, n_zeros):
        delay = delay_state_from_kappa(source, kappa)

        def ratio(t):
            num = g2_plate_analytic(source, fiber_1km, delay, -1, 1.0, t)
            den = g2_unpolarized(source, fiber_1km, t)
            return num / den  # = sin^2(kappa tau/tau_f) modulation factor

        candidates = (np.arange(1, n_zeros + 1) * math.pi / kappa) * tau_f
        return _zero_positions(ratio, tau_f, candidates, 0.2 * tau_f / kappa)

    zeros_full = modulation_zeros(1.0, 4)
    zeros_half = modulation_zeros(0.5, 4)
    spacing_full = np.diff(zeros_full).mean()
    spacing_half = np.diff(zeros_half).mean()
    assert spacing_half / spacing_full == pytest.approx(2.0, rel=1e-6)


def test_plate_identity_and_full_compensation(source, fiber_1km):
    tau = np.linspace(-10e-9, 10e-9, 2001)
    # kappa = 1 reduces to the plain +-45 forms
    delay_1 = delay_state_from_kappa(source, 1.0)
    for sign in (+1, -1):
        assert np.allclose(
            g2_plate_analytic(source, fiber_1km, delay_1, sign, 1.0, tau),
            g2_pm_analytic(source, fiber_1km, sign, 1.0, tau),
            rtol=0,
            atol=0,
        )
    # kappa = 0 kills the destructive peak and leaves the plain envelope
    delay_0 = delay_state_from_kappa(source, 0.0)
    gm = g2_plate_analytic(source, fiber_1km, delay_0, -1, 1.0, tau)
    assert np.max(np.abs(gm)) < 1e-12
    gp = g2_plate_analytic(source, fiber_1km, delay_0, +1, 1.0, tau)
    tau_f = spread_scale(source, fiber_1km).tau_f
    assert np.allclose(gp, np.sinc(tau / tau_f / math.pi) ** 2, rtol=1e-12)


def test_zero_set_is_union_of_envelope_and_modulation(source, fiber_1km):
    tau_f = spread_scale(source, fiber_1km).tau_f
    kappa = 0.7
    delay = delay_state_from_kappa(source, kappa)
    peak = 1.0
    for n in range(1, 4):
        for t0 in (n * math.pi * tau_f, n * math.pi / kappa * tau_f):
            val = g2_plate_analytic(source, fiber_1km, delay, -1, 1.0, t0)
            assert val < 1e-12 * peak


def test_exact_form_close_to_simplified_in_long_fiber(source, fiber_1km):
    tau = np.linspace(-6e-9, 6e-9, 801)
    simp = g2_pm_analytic(source, fiber_1km, +1, 1.0, tau, simplified=True)
    full = g2_pm_analytic(source, fiber_1km, +1, 1.0, tau, simplified=False)
    assert np.max(np.abs(simp - full)) < 1e-3  # displacement is tau0/tau_f ~ 2.5e-5


def test_short_fiber_uses_displaced_envelopes(source):
    # tau_f < 10 tau0_eff: the automatic switch must keep the two displaced
    # envelopes resolved instead of collapsing them
    short = FiberChannel(length_cm=20.0, gvd_s2_per_cm=3.2e-28)
    tau_f = spread_scale(source, short).tau_f
    assert abs(tau_f) < 10 * source.tau0
    tau = np.linspace(-6 * source.tau0, 6 * source.tau0, 1201)
    auto = g2_pm_analytic(source, short, +1, 1.0, tau)
    displaced = g2_pm_analytic(source, short, +1, 1.0, tau, simplified=False)
    collapsed = g2_pm_analytic(source, short, +1, 1.0, tau, simplified=True)
    assert np.allclose(auto, displaced, rtol=0, atol=0)
    assert np.max(np.abs(auto - collapsed)) > 1e-3


def test_analyzer_rates_depend_only_on_angle_sums(source, fiber_1km):
    tau = np.linspace(-6e-9, 6e-9, 301)
    # (theta1, theta2) and (theta2, theta1) share sin(t1+t2) and |sin(t1-t2)|
    g_a = g2_analyzer_analytic(source, fiber_1km, AnalyzerSettings(20 * DEG, 65 * DEG), tau)
    g_b = g2_analyzer_analytic(source, fiber_1km, AnalyzerSettings(65 * DEG, 20 * DEG), tau)
    assert np.allclose(g_a, g_b, rtol=1e-12, atol=1e-15)
    gp = g2_analyzer_analytic(source, fiber_1km, AnalyzerSettings(45 * DEG, 45 * DEG), tau)
    assert np.allclose(gp, g2_pm_analytic(source, fiber_1km, +1, 1.0, tau), rtol=1e-12)
