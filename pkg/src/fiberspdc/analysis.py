"""Parameter recovery and derived statistics from coincidence histograms.

Covers the analysis side of the experiment:

* weighted least-squares fits of the spread-peak families (plain envelope,
  polarization-resolved, plate-modified) recovering peak position, height,
  fiber dispersion, background, and optionally the modulation ratio,
* profile width (FWHM) and fringe-visibility measures,
* the center ratio between constructive and destructive settings,
* the time-windowed two-polarizer counting statistic
  ``R = (N(theta) - N(3 theta)) / N(inf)`` whose classical bound is 0.25,
  with first-order Poisson error propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import fftconvolve

from .detection import (
    FWHM_TO_SIGMA,
    CoincidenceHistogram,
    DetectionChain,
    simulate_histogram,
    window_counts,
)
from .dispersion import FiberChannel, spread_scale
from .kernel import derive_seed, poisson_counts
from .polarization import AnalyzerSettings, DelayState
from .source import SpdcSource

FIT_FAMILIES = ("plain", "gpm", "plate")


class FitConvergenceError(RuntimeError):
    """Fit did not converge; carries the best parameters found so far."""

    def __init__(self, message: str, best: "FitResult"):
        super().__init__(message)
        self.best = best


class DegenerateHistogramError(ValueError):
    """Histogram carries no usable structure (flat or empty)."""


class ProfileRangeError(ValueError):
    """No half-maximum crossing within the sampled span."""


class UndefinedVisibilityError(ValueError):
    """Visibility of two zero counts is undefined."""


@dataclass(frozen=True)
class FitResult:
    """Recovered spread-peak parameters and their 1-sigma uncertainties."""

    peak_position_s: float
    peak_height: float
    gvd_s2_per_cm: float
    background: float
    modulation_kappa: float | None
    drift_visibility: float | None
    chi2_per_dof: float
    uncertainties: dict = field(default_factory=dict)
    n_function_evals: int = 0
    converged: bool = True

    def __post_init__(self) -> None:
        if not self.gvd_s2_per_cm > 0.0:
            raise ValueError("fitted GVD must be positive")
        if self.background < 0.0:
            raise ValueError("fitted background must be >= 0")
        if not math.isfinite(self.chi2_per_dof):
            raise ValueError("chi2_per_dof must be finite")


@dataclass(frozen=True)
class BellResult:
    """Windowed counting statistic R and its Poisson-propagated error."""

    n_theta: float
    n_3theta: float
    n_inf: float
    theta_rad: float
    r_value: float
    sigma_r: float
    accidentals_subtracted: bool
    clamped: bool = False

    def __post_init__(self) -> None:
        expected = (self.n_theta - self.n_3theta) / self.n_inf
        if not math.isclose(expected, self.r_value, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError("r_value inconsistent with its counts")
        if self.sigma_r < 0.0:
            raise ValueError("sigma_r must be >= 0")

    @property
    def violates_classical_bound(self) -> bool:
        return self.r_value - self.sigma_r > 0.25


class CenterRatio(NamedTuple):
    value: float
    finite: bool


def _sinc(x: np.ndarray) -> np.ndarray:
    return np.sinc(x / math.pi)


def _family_profile(family: str, x: np.ndarray, kappa: float, sign: int, v: float) -> np.ndarray:
    env = _sinc(x) ** 2
    if family == "plain":
        return env
    return 0.5 * env * (1.0 + sign * v * np.cos(2.0 * kappa * x))


def _histogram_chain_values(hist: CoincidenceHistogram):
    meta = hist.metadata
    try:
        jitter = float(meta["jitter_fwhm_s"])
        tau0 = 0.5 * float(meta["gv_mismatch_s_per_mm"]) * float(meta["crystal_length_mm"])
        z_cm = float(meta["fiber_length_cm"])
    except KeyError as exc:
        raise KeyError(
            f"histogram metadata missing {exc}; pass source/fiber parameters explicitly"
        ) from exc
    return jitter, tau0, z_cm


def fit_spread_peak(
    hist: CoincidenceHistogram,
    family: str = "plain",
    sign: int = +1,
    initial_guess: dict | None = None,
    fit_drift: bool = False,
    source: SpdcSource | None = None,
    fiber_length_cm: float | None = None,
    jitter_fwhm_s: float | None = None,
    oversample: int = 4,
    max_iterations: int = 200,
) -> FitResult:
    """Weighted least-squares fit of a spread-peak model to a histogram.

    The model is the chosen analytic family, with the fiber dispersion
    entering through the envelope scale, convolved with the chain's Gaussian
    timing response and averaged over each channel.  Residuals carry Poisson
    weights (variance ``max(count, 1)``).  Free parameters: peak position,
    height, fiber GVD, background, plus the modulation ratio for the
    ``plate`` family and optionally the interference visibility.

    Source, fiber length, and jitter default to the histogram metadata.
    Initial guesses follow a cold-start recipe (argmax / outer-channel
    median / width heuristic) and can be overridden per key via
    ``initial_guess`` with entries among position, height, gvd, background,
    kappa, drift.

    Raises
    ------
    DegenerateHistogramError
        For flat or empty histograms (rank-deficient problem).
    FitConvergenceError
        If the optimizer exhausts its iteration budget; the best parameters
        found are attached to the exception.
    """
    if family not in FIT_FAMILIES:
        raise ValueError(f"family must be one of {FIT_FAMILIES}")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    counts = hist.counts.astype(float)
    n_ch = counts.size
    if np.all(counts == counts[0]):
        raise DegenerateHistogramError("histogram is flat; nothing to fit")

    if jitter_fwhm_s is None or source is None or fiber_length_cm is None:
        jitter_meta, tau0_meta, z_meta = _histogram_chain_values(hist)
        jitter_fwhm_s = jitter_meta if jitter_fwhm_s is None else jitter_fwhm_s
        tau0 = source.tau0 if source is not None else tau0_meta
        z_cm = fiber_length_cm if fiber_length_cm is not None else z_meta
    else:
        tau0 = source.tau0
        z_cm = fiber_length_cm

    names = ["position", "height", "gvd", "background"]
    if family == "plate":
        names.append("kappa")
    if fit_drift:
        names.append("drift")
    if n_ch < 5 * len(names):
        raise ValueError("need at least 5 channels per free parameter")

    centers = hist.channel_centers_s
    width = hist.channel_width_s

    # cold-start recipe
    outer = max(1, n_ch // 20)
    bg0 = float(np.median(np.concatenate([counts[:outer], counts[-outer:]])))
    excess = np.maximum(counts - bg0, 0.0)
    if excess.sum() <= 0.0:
        raise DegenerateHistogramError("no counts above background")
    if sign < 0 and family != "plain":
        # destructive-setting profiles dip at the center; the centroid of the
        # symmetric lobes is a far better position start than either lobe
        t0_0 = float(np.sum(centers * excess) / excess.sum())
    else:
        t0_0 = float(centers[np.argmax(counts)])
    h0 = float(counts.max() - bg0)
    fwhm_est = _fwhm_estimate(centers, counts, bg0)
    tau_f_est = math.sqrt(max(fwhm_est**2 - jitter_fwhm_s**2, (0.5 * fwhm_est) ** 2)) / 2.7831
    gvd0 = tau_f_est * tau0 / (2.0 * z_cm)

    defaults = {"position": t0_0, "height": h0, "gvd": gvd0, "background": bg0,
                "kappa": 1.0, "drift": 1.0}
    if initial_guess:
        unknown = set(initial_guess) - set(defaults)
        if unknown:
            raise ValueError(f"unknown initial_guess keys: {sorted(unknown)}")
        defaults.update(initial_guess)
    p0 = np.array([defaults[name] for name in names])

    scale = np.array(
        [max(abs(v), s) for v, s in zip(p0, [width, 1.0, gvd0 * 0.1, 1.0, 0.1, 0.1][: len(p0)])]
    )
    lower = {"position": centers[0], "height": 0.0, "gvd": gvd0 * 1e-2,
             "background": 0.0, "kappa": 0.0, "drift": 0.0}
    upper = {"position": centers[-1], "height": np.inf, "gvd": gvd0 * 1e2,
             "background": np.inf, "kappa": 6.0, "drift": 1.0}
    lo = np.array([lower[n] for n in names]) / scale
    hi = np.array([upper[n] for n in names]) / scale

    fine, kern, idx = _model_grid(centers, width, jitter_fwhm_s, oversample)
    sigma_w = np.sqrt(np.maximum(counts, 1.0))
    tau0_z = (tau0, z_cm)

    def model(p: np.ndarray) -> np.ndarray:
        vals = dict(zip(names, p * scale))
        tau_f = 2.0 * vals["gvd"] * tau0_z[1] / tau0_z[0]
        x = (fine - vals["position"]) / tau_f
        prof = _family_profile(family, x, vals.get("kappa", 1.0), sign, vals.get("drift", 1.0))
        if kern is not None:
            prof = fftconvolve(prof, kern, mode="same")
        per_channel = prof[idx].mean(axis=1)
        return vals["height"] * per_channel + vals["background"]

    def residuals(p: np.ndarray) -> np.ndarray:
        return (model(p) - counts) / sigma_w

    res = least_squares(
        residuals,
        p0 / scale,
        bounds=(lo, hi),
        method="trf",
        xtol=1e-6,
        ftol=1e-9,
        gtol=None,
        max_nfev=max_iterations * (len(names) + 1),
    )
    chi2_dof = float(2.0 * res.cost / max(n_ch - len(names), 1))
    params = {name: float(v) for name, v in zip(names, res.x * scale)}
    uncertainties = _quadratic_uncertainties(res.jac, names, scale)
    fit = FitResult(
        peak_position_s=params["position"],
        peak_height=params["height"],
        gvd_s2_per_cm=params["gvd"],
        background=params["background"],
        modulation_kappa=params.get("kappa"),
        drift_visibility=params.get("drift"),
        chi2_per_dof=chi2_dof,
        uncertainties=uncertainties,
        n_function_evals=int(res.nfev),
        converged=bool(res.status > 0),
    )
    if res.status <= 0:
        raise FitConvergenceError(f"fit did not converge: {res.message}", best=fit)
    return fit


def evaluate_fit_model(
    hist: CoincidenceHistogram,
    fit: FitResult,
    family: str = "plain",
    sign: int = +1,
    source: SpdcSource | None = None,
    fiber_length_cm: float | None = None,
    jitter_fwhm_s: float | None = None,
    oversample: int = 4,
) -> np.ndarray:
    """Fitted model evaluated on the histogram channels (for residual files)."""
    if jitter_fwhm_s is None or source is None or fiber_length_cm is None:
        jitter_meta, tau0_meta, z_meta = _histogram_chain_values(hist)
        jitter_fwhm_s = jitter_meta if jitter_fwhm_s is None else jitter_fwhm_s
        tau0 = source.tau0 if source is not None else tau0_meta
        z_cm = fiber_length_cm if fiber_length_cm is not None else z_meta
    else:
        tau0 = source.tau0
        z_cm = fiber_length_cm
    centers = hist.channel_centers_s
    fine, kern, idx = _model_grid(centers, hist.channel_width_s, jitter_fwhm_s, oversample)
    tau_f = 2.0 * fit.gvd_s2_per_cm * z_cm / tau0
    x = (fine - fit.peak_position_s) / tau_f
    prof = _family_profile(
        family,
        x,
        fit.modulation_kappa if fit.modulation_kappa is not None else 1.0,
        sign,
        fit.drift_visibility if fit.drift_visibility is not None else 1.0,
    )
    if kern is not None:
        prof = fftconvolve(prof, kern, mode="same")
    return fit.peak_height * prof[idx].mean(axis=1) + fit.background


def _model_grid(centers: np.ndarray, width: float, jitter_fwhm_s: float, oversample: int):
    """Oversampled evaluation grid, discrete response kernel, channel index map."""
    n_ch = centers.size
    h = width / oversample
    sigma = jitter_fwhm_s * FWHM_TO_SIGMA
    pad = int(math.ceil(6.0 * sigma / h)) if sigma > 0 else 0
    n_fine = n_ch * oversample + 2 * pad
    start = centers[0] - 0.5 * width - pad * h
    fine = start + (np.arange(n_fine) + 0.5) * h
    if sigma > 0:
        k = np.arange(-pad, pad + 1) * h
        kern = np.exp(-0.5 * (k / sigma) ** 2)
        kern /= kern.sum()
    else:
        kern = None
    idx = pad + np.arange(n_ch * oversample).reshape(n_ch, oversample)
    return fine, kern, idx


def _quadratic_uncertainties(jac: np.ndarray, names: Sequence[str], scale: np.ndarray) -> dict:
    """1-sigma from the quadratic expansion at the optimum (whitened J)."""
    try:
        cov = np.linalg.inv(jac.T @ jac)
        sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError:
        sig = np.full(len(names), np.nan)
    return {name: float(s * sc) for name, s, sc in zip(names, sig, scale)}


def _fwhm_estimate(times: np.ndarray, values: np.ndarray, background: float) -> float:
    peak = values.max()
    half = background + 0.5 * (peak - background)
    above = np.nonzero(values >= half)[0]
    if above.size == 0:
        return 4.0 * (times[1] - times[0])
    return float((above[-1] - above[0] + 1) * (times[1] - times[0]))


def fwhm(times: np.ndarray, values: np.ndarray, background: float = 0.0) -> float:
    """Linear-interpolated full width at half of (max - background).

    The profile must have a unique global maximum above background and both
    half-crossings inside the span.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    i_max = int(np.argmax(values))
    peak = values[i_max]
    if peak <= background:
        raise ProfileRangeError("profile maximum does not exceed the background")
    half = background + 0.5 * (peak - background)

    left = np.nonzero(values[: i_max + 1] < half)[0]
    right_rel = np.nonzero(values[i_max:] < half)[0]
    if left.size == 0 or right_rel.size == 0:
        raise ProfileRangeError("no half-maximum crossing inside the sampled span")
    l = left[-1]
    r = i_max + right_rel[0]
    t_left = times[l] + (half - values[l]) / (values[l + 1] - values[l]) * (times[l + 1] - times[l])
    t_right = times[r - 1] + (half - values[r - 1]) / (values[r] - values[r - 1]) * (
        times[r] - times[r - 1]
    )
    return float(t_right - t_left)


def visibility(counts_max: float, counts_min: float) -> float:
    """Interference visibility ``(max - min)/(max + min)``."""
    if counts_min < 0 or counts_max < counts_min:
        raise ValueError("require counts_max >= counts_min >= 0")
    total = counts_max + counts_min
    if total == 0:
        raise UndefinedVisibilityError("visibility of zero counts is undefined")
    return (counts_max - counts_min) / total


def center_ratio(
    times: np.ndarray,
    g_plus: np.ndarray,
    g_minus: np.ndarray,
    window_center_s: float = 0.0,
    window_width_s: float = 0.0,
) -> CenterRatio:
    """Ratio of window-integrated constructive to destructive profiles.

    Both profiles must share the grid.  ``window_width_s = 0`` compares the
    single samples nearest the window center.  A zero denominator (the
    unsmeared destructive profile vanishes at the center) is reported as an
    infinite ratio with ``finite=False``.
    """
    times = np.asarray(times, dtype=float)
    if window_width_s > 0.0:
        sel = np.abs(times - window_center_s) <= 0.5 * window_width_s
        if not np.any(sel):
            raise ProfileRangeError("window contains no samples")
        num = float(np.sum(np.asarray(g_plus)[sel]))
        den = float(np.sum(np.asarray(g_minus)[sel]))
    else:
        i = int(np.argmin(np.abs(times - window_center_s)))
        num = float(np.asarray(g_plus)[i])
        den = float(np.asarray(g_minus)[i])
    if den == 0.0:
        return CenterRatio(value=math.inf, finite=False)
    return CenterRatio(value=num / den, finite=True)


# --- fringe scans and the windowed counting statistic -----------------------


def _windowed_rate_fraction(
    source: SpdcSource,
    fiber: FiberChannel,
    settings: AnalyzerSettings | None,
    chain: DetectionChain,
    window_center_s: float,
    window_width_s: float,
    delay: DelayState | None,
    drift_visibility: float,
) -> float:
    """Probability that an incident spread pair lands in the counting window.

    Normalized to the unpolarized total (analytically ``2 pi tau_f`` in the
    long-fiber regime), with the Gaussian response folded in exactly via the
    normal CDF.
    """
    from scipy.special import ndtr

    from .dispersion import g2_analyzer_analytic, g2_unpolarized

    tau_f = spread_scale(source, fiber).tau_f
    sigma = chain.jitter_sigma_s
    half = 0.5 * window_width_s
    reach = 8.0 * sigma + half
    span = max(12.0 * abs(tau_f), 2.0 * reach)
    n = 1 << 14
    t = window_center_s + np.linspace(-span, span, n)
    if settings is None:
        g = g2_unpolarized(source, fiber, t, delay=delay)
    else:
        g = g2_analyzer_analytic(
            source, fiber, settings, t, delay=delay, drift_visibility=drift_visibility
        )
    lo = window_center_s - half
    hi = window_center_s + half
    if sigma > 0:
        weight = ndtr((hi - t) / sigma) - ndtr((lo - t) / sigma)
    else:
        weight = ((t >= lo) & (t <= hi)).astype(float)
    numerator = float(np.trapezoid(g * weight, t))
    return numerator / (2.0 * math.pi * abs(tau_f))


def _setting_model(
    source: SpdcSource,
    fiber: FiberChannel,
    settings: AnalyzerSettings | None,
    delay: DelayState | None,
    drift_visibility: float,
):
    from .dispersion import g2_analyzer_analytic, g2_unpolarized

    if settings is None:
        return lambda t: g2_unpolarized(source, fiber, t, delay=delay)
    return lambda t: g2_analyzer_analytic(
        source, fiber, settings, t, delay=delay, drift_visibility=drift_visibility
    )


def _mc_event_mean(
    model,
    source: SpdcSource,
    fiber: FiberChannel,
    chain: DetectionChain,
    incident_pairs: float,
) -> float:
    """Expected events inside the sampler domain for a given incident flux.

    Incident pairs map to detected events through the model mass over the
    padded analyzer span, normalized by the unpolarized total
    ``2 pi |tau_f|``; Poisson thinning then makes the Monte Carlo counts
    agree with the deterministic windowed expectations.
    """
    from .detection import model_mass

    tau_f = spread_scale(source, fiber).tau_f
    return incident_pairs * model_mass(model, chain) / (2.0 * math.pi * abs(tau_f))


def fringe_scan(
    source: SpdcSource,
    fiber: FiberChannel,
    chain: DetectionChain,
    theta1_values: Sequence[float],
    theta2: float = math.pi / 4.0,
    window_center_s: float = 0.0,
    window_width_s: float = 0.43e-9,
    counts_per_setting: float = 1e4,
    delay: DelayState | None = None,
    drift_visibility: float = 1.0,
    seed: int | None = None,
) -> list[tuple[float, float]]:
    """Windowed coincidence counts versus the first analyzer angle.

    Deterministic expected counts by default; with ``seed`` the counts are
    Monte Carlo samples (pair number Poisson-fluctuated per setting, delays
    and jitter drawn through the event kernel).  ``counts_per_setting`` is
    the number of spread pairs incident on the analyzers per setting.  For
    the second analyzer fixed at 45 degrees the expected shape is
    ``1 + V_eff sin(2 theta1)``, extremal at +-45 degrees.
    """
    results: list[tuple[float, float]] = []
    for k, theta1 in enumerate(theta1_values):
        settings = AnalyzerSettings(theta1=theta1, theta2=theta2)
        if seed is None:
            frac = _windowed_rate_fraction(
                source, fiber, settings, chain, window_center_s, window_width_s,
                delay, drift_visibility,
            )
            results.append((theta1, counts_per_setting * frac))
            continue
        setting_seed = derive_seed(seed, 0x5343414E + k)  # 'SCAN' + index
        model = _setting_model(source, fiber, settings, delay, drift_visibility)
        mean = _mc_event_mean(model, source, fiber, chain, counts_per_setting)
        n_events = int(poisson_counts(setting_seed, [mean])[0])
        hist = simulate_histogram(model, chain, setting_seed, n_events=n_events)
        results.append((theta1, float(window_counts(hist, window_center_s, window_width_s))))
    return results


def scan_visibility(scan: Sequence[tuple[float, float]]) -> float:
    """Visibility of a fringe scan from its extreme counts."""
    counts = [c for _, c in scan]
    return visibility(max(counts), min(counts))


def bell_R(
    n_theta: float,
    n_3theta: float,
    n_inf: float,
    theta_rad: float,
    accidental_estimates: tuple[float, float, float] | None = None,
) -> BellResult:
    """Counting statistic ``R = (N(theta) - N(3 theta))/N(inf)``.

    Classically bounded by 0.25 for ideal polarizers; larger values witness
    polarization entanglement of the windowed pairs.  Accidental estimates,
    when given, are subtracted first (negative results clamp to zero and set
    the ``clamped`` flag).  ``sigma_r`` treats the three raw counts as
    independent Poisson variables.
    """
    if not 0.0 < theta_rad < math.pi / 2.0:
        raise ValueError("theta must lie in (0, pi/2)")
    raw = np.array([n_theta, n_3theta, n_inf], dtype=float)
    if np.any(raw < 0.0):
        raise ValueError("counts must be >= 0")
    subtracted = accidental_estimates is not None
    clamped = False
    vals = raw.copy()
    if subtracted:
        acc = np.asarray(accidental_estimates, dtype=float)
        vals = raw - acc
        if np.any(vals < 0.0):
            clamped = True
            vals = np.maximum(vals, 0.0)
    if vals[2] <= 0.0:
        raise ValueError("N(inf) must be positive after subtraction")
    r = float((vals[0] - vals[1]) / vals[2])
    var = np.maximum(raw, 1.0)  # Poisson variance of the raw counts
    sigma = math.sqrt((var[0] + var[1]) / vals[2] ** 2 + r**2 * var[2] / vals[2] ** 2)
    return BellResult(
        n_theta=float(vals[0]),
        n_3theta=float(vals[1]),
        n_inf=float(vals[2]),
        theta_rad=theta_rad,
        r_value=r,
        sigma_r=sigma,
        accidentals_subtracted=subtracted,
        clamped=clamped,
    )


def bell_measurement(
    source: SpdcSource,
    fiber: FiberChannel,
    chain: DetectionChain,
    theta_rad: float,
    window_center_s: float = 0.0,
    window_width_s: float = 0.43e-9,
    pairs: float = 1e4,
    delay: DelayState | None = None,
    drift_visibility: float = 1.0,
    seed: int | None = None,
    subtract_accidentals: bool = True,
) -> BellResult:
    """Run the three-setting windowed measurement and form R.

    ``N(theta)`` and ``N(3 theta)`` use analyzer one at ``45 deg + theta``
    (``+ 3 theta``) with analyzer two fixed at 45 degrees; ``N(inf)`` removes
    the analyzers.  The same counting window applies to all three settings,
    including the unpolarized normalization.  Deterministic expectations
    without a seed, Monte Carlo counts with one.
    """
    theta2 = math.pi / 4.0
    configs: list[AnalyzerSettings | None] = [
        AnalyzerSettings(theta2 + theta_rad, theta2),
        AnalyzerSettings(theta2 + 3.0 * theta_rad, theta2),
        None,
    ]
    n_window_channels = max(1, round(window_width_s / chain.channel_width_s))
    accidental_in_window = chain.accidentals_per_channel * n_window_channels
    counts = []
    for k, settings in enumerate(configs):
        if seed is None:
            frac = _windowed_rate_fraction(
                source, fiber, settings, chain, window_center_s, window_width_s,
                delay, drift_visibility,
            )
            counts.append(pairs * frac + accidental_in_window)
            continue
        setting_seed = derive_seed(seed, 0x42454C4C + k)  # 'BELL' + setting
        model = _setting_model(source, fiber, settings, delay, drift_visibility)
        mean = _mc_event_mean(model, source, fiber, chain, pairs)
        n_events = int(poisson_counts(setting_seed, [mean])[0])
        hist = simulate_histogram(model, chain, setting_seed, n_events=n_events)
        counts.append(float(window_counts(hist, window_center_s, window_width_s)))
    estimates = (accidental_in_window,) * 3 if subtract_accidentals else None
    return bell_R(counts[0], counts[1], counts[2], theta_rad, accidental_estimates=estimates)


def format_fit_report(fit: FitResult) -> str:
    """Flat key=value block for a fit result."""
    lines = [
        f"peak_position_s={fit.peak_position_s!r}",
        f"peak_height={fit.peak_height!r}",
        f"gvd_s2_per_cm={fit.gvd_s2_per_cm!r}",
        f"background={fit.background!r}",
    ]
    if fit.modulation_kappa is not None:
        lines.append(f"modulation_kappa={fit.modulation_kappa!r}")
    if fit.drift_visibility is not None:
        lines.append(f"drift_visibility={fit.drift_visibility!r}")
    lines.append(f"chi2_per_dof={fit.chi2_per_dof!r}")
    for name, sig in fit.uncertainties.items():
        lines.append(f"sigma_{name}={sig!r}")
    lines.append(f"n_function_evals={fit.n_function_evals}")
    lines.append(f"converged={fit.converged}")
    return "\n".join(lines) + "\n"


def format_bell_report(res: BellResult) -> str:
    lines = [
        f"n_theta={res.n_theta!r}",
        f"n_3theta={res.n_3theta!r}",
        f"n_inf={res.n_inf!r}",
        f"theta_rad={res.theta_rad!r}",
        f"R={res.r_value!r}",
        f"sigma_R={res.sigma_r!r}",
        f"accidentals_subtracted={res.accidentals_subtracted}",
        f"clamped={res.clamped}",
        f"violates_classical_bound={res.violates_classical_bound}",
    ]
    return "\n".join(lines) + "\n"
