import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from fiberspdc import (
    CoincidenceHistogram,
    DetectionChain,
    WindowRangeError,
    expected_channel_counts,
    g2_pm_analytic,
    jitter_convolve,
    read_histogram,
    simulate_histogram,
    spread_scale,
    window_counts,
    write_histogram,
)
from fiberspdc.analysis import fwhm
from fiberspdc.kernel import EmptyModelError

SIGMA_75 = 0.75e-9 / (2 * math.sqrt(2 * math.log(2)))


def _gauss_model(t):
    return np.exp(-0.5 * (t / 0.9e-9) ** 2)


@pytest.fixture
def chain():
    return DetectionChain(
        jitter_fwhm_s=750e-12,
        channel_width_s=61.4e-12,
        n_channels=256,
        accidentals_per_channel=0.0,
        pairs=100_000,
    )


def test_chain_invariants():
    with pytest.raises(ValueError):
        DetectionChain(jitter_fwhm_s=-1.0)
    with pytest.raises(ValueError):
        DetectionChain(channel_width_s=0.0)
    with pytest.raises(ValueError):
        DetectionChain(n_channels=0)
    with pytest.raises(ValueError):
        DetectionChain(pairs=-1)


def test_channel_grid_centered_on_window(chain):
    centers = chain.channel_centers()
    assert centers[chain.n_channels // 2] == pytest.approx(chain.window_center_s, abs=1e-30)
    assert np.allclose(np.diff(centers), chain.channel_width_s)


# --- jitter convolution ------------------------------------------------------


def test_jitter_zero_is_identity():
    t = np.linspace(-5e-9, 5e-9, 1001)
    y = _gauss_model(t)
    assert np.array_equal(jitter_convolve(t, y, 0.0), y)


def test_jitter_impulse_response():
    t = np.linspace(-6e-9, 6e-9, 4001)
    y = np.zeros_like(t)
    y[len(t) // 2] = 1.0
    out = jitter_convolve(t, y, 1.5e-9)
    assert fwhm(t, out) == pytest.approx(1.5e-9, abs=2 * (t[1] - t[0]))


def test_jitter_preserves_area_and_positivity():
    t = np.linspace(-20e-9, 20e-9, 2**13)
    y = _gauss_model(t) + 0.2 * np.exp(-0.5 * ((t - 3e-9) / 0.4e-9) ** 2)
    out = jitter_convolve(t, y, 0.75e-9)
    assert np.trapezoid(out, t) == pytest.approx(np.trapezoid(y, t), rel=1e-6)
    assert np.all(out >= 0.0)
    with pytest.raises(ValueError):
        jitter_convolve(t, y - 1.0, 0.75e-9)


def test_jitter_shift_equivariance():
    t = np.linspace(-20e-9, 20e-9, 2**12)
    dt = t[1] - t[0]
    shift_bins = 37
    y = _gauss_model(t)
    shifted_then = jitter_convolve(t, np.roll(y, shift_bins), 0.75e-9)
    then_shifted = np.roll(jitter_convolve(t, y, 0.75e-9), shift_bins)
    interior = slice(shift_bins + 1, -shift_bins - 1)
    assert np.allclose(shifted_then[interior], then_shifted[interior], rtol=1e-6, atol=1e-9)


def test_destructive_floor_after_jitter(source, fiber_1km):
    # The destructive profile vanishes at the center; the timing response
    # fills it to a floor such that, at the drift level matching the
    # measured fringe contrast, the center ratio sits around five to eight.
    t = np.linspace(-30e-9, 30e-9, 2**13 + 1)
    v = 0.78
    assert g2_pm_analytic(source, fiber_1km, -1, 1.0, 0.0) == 0.0
    gp = g2_pm_analytic(source, fiber_1km, +1, v, t)
    gm = g2_pm_analytic(source, fiber_1km, -1, v, t)
    gp_c = jitter_convolve(t, gp, 0.75e-9)
    gm_c = jitter_convolve(t, gm, 0.75e-9)
    i0 = len(t) // 2
    assert gm_c[i0] > 0.0
    ratio = gp_c[i0] / gm_c[i0]
    # independent quadrature oracle for both center values
    tau_f = spread_scale(source, fiber_1km).tau_f

    def smeared_center(sign):
        def integrand(x):
            env = np.sinc(x / math.pi) ** 2
            mod = 1.0 + sign * v * math.cos(2 * x)
            g = math.exp(-0.5 * (x * tau_f / SIGMA_75) ** 2)
            return 0.5 * env * mod * g

        val, _ = integrate.quad(integrand, -60.0, 60.0, limit=400)
        return val

    oracle = smeared_center(+1) / smeared_center(-1)
    assert ratio == pytest.approx(oracle, rel=1e-3)
    assert 5.0 < ratio < 8.0


# --- Monte Carlo histograms --------------------------------------------------


def test_empty_acquisition_gives_empty_histogram(chain):
    hist = simulate_histogram(_gauss_model, chain, seed=3, n_events=0)
    assert hist.total_counts() == 0


def test_zero_model_rejected(chain):
    with pytest.raises(EmptyModelError):
        simulate_histogram(lambda t: np.zeros_like(t), chain, seed=3)
    with pytest.raises(ValueError):
        simulate_histogram(lambda t: -np.ones_like(t), chain, seed=3)


def test_total_counts_bookkeeping(chain):
    hist = simulate_histogram(_gauss_model, chain, seed=11)
    expected = expected_channel_counts(_gauss_model, chain).sum()
    assert abs(hist.total_counts() - expected) < 5 * math.sqrt(expected)


def test_monte_carlo_chi2_against_exact_expectation(chain):
    chain_acc = replace(chain, accidentals_per_channel=25.0, pairs=1_000_000)
    hist = simulate_histogram(_gauss_model, chain_acc, seed=2024)
    m = expected_channel_counts(_gauss_model, chain_acc)
    chi2 = float(np.sum((hist.counts - m) ** 2 / m) / m.size)
    assert 0.8 < chi2 < 1.2


def test_monte_carlo_chi2_stable_when_doubling_n(chain):
    for seed, n in [(5, 250_000), (6, 500_000), (7, 1_000_000)]:
        c = replace(chain, pairs=n, accidentals_per_channel=10.0)
        hist = simulate_histogram(_gauss_model, c, seed=seed)
        m = expected_channel_counts(_gauss_model, c)
        chi2 = float(np.sum((hist.counts - m) ** 2 / m) / m.size)
        assert 0.8 < chi2 < 1.2, f"chi2/dof {chi2} out of band at N={n}"


def test_accidental_floor_is_poissonian(chain):
    rate = 30.0
    c = replace(chain, accidentals_per_channel=rate, n_channels=512)
    hist = simulate_histogram(_gauss_model, c, seed=8, n_events=0)
    counts = hist.counts
    se = math.sqrt(rate / counts.size)
    assert abs(counts.mean() - rate) < 4 * se
    assert abs(counts.var() / rate - 1.0) < 0.15


def test_rerun_reproducibility(chain, tmp_path):
    h1 = simulate_histogram(_gauss_model, chain, seed=99)
    h2 = simulate_histogram(_gauss_model, chain, seed=99)
    assert np.array_equal(h1.counts, h2.counts)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_histogram(h1, p1)
    write_histogram(h2, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_histogram_invariants():
    with pytest.raises(ValueError):
        CoincidenceHistogram(np.array([1, -2]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        CoincidenceHistogram(np.array([1, 2]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        CoincidenceHistogram(np.array([1, 2, 3]), np.array([0.0, 1.0, 2.5]))


# --- counting windows --------------------------------------------------------


def _uniform_hist(n=512, width=61.4e-12):
    centers = (np.arange(n) - n // 2) * width
    return CoincidenceHistogram(np.ones(n, dtype=np.int64), centers,
                                {"channel_width_s": width})


def test_window_full_span_is_total():
    hist = _uniform_hist()
    mid = 0.5 * (hist.channel_centers_s[0] + hist.channel_centers_s[-1])
    total = window_counts(hist, mid, 511 * 61.4e-12)
    assert total == hist.total_counts()


def test_window_seven_channels():
    # 0.43 ns at 61.4 ps per channel selects exactly seven channel centers
    hist = _uniform_hist()
    assert window_counts(hist, 0.0, 0.43e-9) == 7


def test_window_empty_histogram():
    n = 64
    centers = (np.arange(n) - n // 2) * 61.4e-12
    hist = CoincidenceHistogram(np.zeros(n, dtype=np.int64), centers)
    assert window_counts(hist, 0.0, 0.43e-9) == 0


def test_window_outside_span_raises():
    hist = _uniform_hist(n=64)
    with pytest.raises(WindowRangeError):
        window_counts(hist, 0.0, 1.0)
    with pytest.raises(WindowRangeError):
        window_counts(hist, 5e-9, 0.43e-9)


# --- file format -------------------------------------------------------------


def test_histogram_roundtrip(chain, tmp_path):
    chain_md = replace(chain, accidentals_per_channel=5.0)
    hist = simulate_histogram(
        _gauss_model, chain_md, seed=41, metadata={"note": "roundtrip", "theta1_rad": 0.25}
    )
    path = tmp_path / "hist.csv"
    write_histogram(hist, path)
    back = read_histogram(path)
    assert np.array_equal(back.counts, hist.counts)
    assert np.allclose(back.channel_centers_s, hist.channel_centers_s, rtol=0, atol=1e-18)
    assert back.metadata["seed"] == 41
    assert back.metadata["note"] == "roundtrip"
    assert back.metadata["theta1_rad"] == 0.25
    # writing the parsed histogram again is byte-identical
    path2 = tmp_path / "hist2.csv"
    write_histogram(back, path2)
    assert path.read_bytes() == path2.read_bytes()
