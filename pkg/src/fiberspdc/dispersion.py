"""Dispersive spreading of the two-photon amplitude in a fiber.

Both photons of a pair traverse the same fiber, so the pair amplitude picks
up the quadratic spectral phase ``exp(-i k'' z omega^2)`` (the linear terms
of the two photons cancel in the arrival-time difference, and the two
half-quadratic single-photon terms add).  For fibers long enough that the
chirped amplitude is much wider than its initial support, the propagated
time-domain amplitude is simply a scaled copy of the spectral amplitude --
the fiber performs a Fourier transform of the two-photon amplitude:

    F_out(tau') ~ (4 pi i k'' z)^(-1/2) exp(i tau'^2 / (4 k'' z))
                  * F(omega) at omega = tau' / (2 k'' z)

with ``tau' = tau - k' z`` the shifted arrival-time difference.  The sinc
spectrum therefore maps onto a ``sinc^2`` intensity correlation of
characteristic width ``tau_f = 2 k'' z / tau0``, and the polarizer-induced
modulation ``cos/sin(omega tau0_eff)`` maps onto ``cos/sin(kappa tau'/tau_f)``
fringes riding on that envelope.

Only the intensity correlation spreads: the magnitude spectrum (and with it
the first-order correlation) is untouched by the pure spectral phase, which
is the dispersion-cancellation property checked in the test suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .polarization import AnalyzerSettings, DelayState
from .source import (
    FrequencyGrid,
    SampledAmplitude,
    SpdcSource,
    sinc_spectral_amplitude,
)


class GridResolutionError(ValueError):
    """The sampling grid cannot hold the spread correlation function."""


@dataclass(frozen=True)
class FiberChannel:
    """Fiber length and dispersion-law derivatives at the pair wavelength.

    ``group_delay_s_per_cm`` (k') only shifts the arrival-time origin and is
    removed from all profiles; ``gvd_s2_per_cm`` (k'') drives the spreading.
    Signal and idler dispersion are assumed equal -- for unequal photons the
    arithmetic mean of the two values should be supplied.
    """

    length_cm: float
    gvd_s2_per_cm: float
    group_delay_s_per_cm: float = 0.0

    def __post_init__(self) -> None:
        if self.length_cm < 0.0:
            raise ValueError("length_cm must be >= 0")

    @property
    def chirp_s2(self) -> float:
        """Accumulated pair chirp ``k'' z`` in s^2."""
        return self.gvd_s2_per_cm * self.length_cm


@dataclass(frozen=True)
class SpreadScale:
    """Characteristic scales of the spread correlation function.

    ``tau_f = 2 k'' z / tau0`` uses the bare crystal delay: it is the scale
    of the spectral envelope, which plates do not alter (plates only rescale
    the interference modulation through ``kappa``).  ``tau_shift = k' z`` is
    the common group delay removed from the time axis.
    """

    tau_f: float
    tau_shift: float


def spread_scale(
    source: SpdcSource, fiber: FiberChannel, delay: DelayState | None = None
) -> SpreadScale:
    """Spread width ``2 k'' z / tau0`` and axis shift ``k' z``.

    ``delay`` is accepted for interface symmetry with the correlation
    functions; the envelope scale itself is plate-independent.
    """
    tau0 = source.tau0
    if tau0 == 0.0:
        raise ValueError("source with zero e-o delay has no envelope scale")
    return SpreadScale(
        tau_f=2.0 * fiber.chirp_s2 / tau0,
        tau_shift=fiber.group_delay_s_per_cm * fiber.length_cm,
    )


def propagate_exact(a: SampledAmplitude, fiber: FiberChannel) -> SampledAmplitude:
    """Propagate a spectral amplitude through the fiber without approximation.

    Multiplies by the pair phase ``exp(-i k'' z omega^2)`` and transforms to
    the time domain.  The output time axis is already the shifted variable
    ``tau' = tau - k' z``: the linear phase of the common group delay and
    the axis shift cancel exactly, so neither is applied numerically (the
    shift is reported by :func:`spread_scale`).

    The magnitude spectrum is untouched (pure phase), so the norm and the
    first-order correlation are preserved.

    Raises
    ------
    GridResolutionError
        If the estimated spread profile (FWHM of the mapped magnitude
        spectrum) exceeds 80% of the conjugate time span, i.e. the result
        would not fit on the grid.
    """
    if a.domain != "spectral":
        raise ValueError("propagate_exact expects a spectral amplitude")
    omegas = a.grid.omegas()
    chirp = fiber.chirp_s2
    est = _mapped_spread_fwhm(a, chirp)
    if est > 0.8 * a.grid.time_span:
        raise GridResolutionError(
            f"spread FWHM estimate {est:.3e} s exceeds 80% of the grid time span "
            f"{a.grid.time_span:.3e} s; enlarge the grid (see suggest_propagation_grid)"
        )
    from .source import to_time_domain

    phased = SampledAmplitude(
        grid=a.grid,
        values=a.values * np.exp(-1j * chirp * omegas**2),
        domain="spectral",
    )
    return to_time_domain(phased)


def _mapped_spread_fwhm(a: SampledAmplitude, chirp_s2: float) -> float:
    """Estimated output FWHM: spectral-intensity FWHM mapped by 2 k'' z."""
    if chirp_s2 == 0.0:
        return 0.0
    intensity = np.abs(a.values) ** 2
    peak = intensity.max()
    if peak <= 0.0:
        return 0.0
    above = np.nonzero(intensity >= 0.5 * peak)[0]
    width_omega = (above[-1] - above[0] + 1) * a.grid.d_omega
    return 2.0 * abs(chirp_s2) * width_omega


def suggest_propagation_grid(
    source: SpdcSource,
    fiber: FiberChannel,
    lobes: float = 2.5,
    guard: float = 1.25,
    max_samples: int = 2**24,
) -> FrequencyGrid:
    """Grid on which exact propagation through ``fiber`` is alias-free.

    Keeps ``lobes`` sinc lobes per side (band edge ``omega_max``) and sizes
    ``n_samples`` so the whole chirped signal, whose extent is the band edge
    mapped by ``2 k'' z``, fits inside the conjugate time span with a safety
    factor ``guard``.
    """
    omega_max = guard * lobes * math.pi / abs(source.tau0)
    chirp = abs(fiber.chirp_s2)
    # span = pi n / omega_max must exceed guard * 2 * (2 k'' z) * omega_max
    n_needed = guard * 4.0 * chirp * omega_max**2 / math.pi
    n = 2 ** max(10, math.ceil(math.log2(max(n_needed, 2.0))))
    if n > max_samples:
        raise GridResolutionError(
            f"alias-free propagation would need {n} samples (> {max_samples})"
        )
    return FrequencyGrid(n_samples=n, omega_max=omega_max)


def band_limited(f, omega_edge: float, order: int = 8):
    """Apodize a spectral amplitude with a smooth super-Gaussian roll-off.

    Hard spectral truncation of the slowly decaying sinc tails would alias
    chirped energy back into the observation window during exact
    propagation; rolling the band off smoothly at ``omega_edge`` suppresses
    the tails below the comparison floor while leaving the central lobes
    (and hence the spread-profile shape) untouched.
    """

    def apodized(omega):
        omega = np.asarray(omega, dtype=float)
        return f(omega) * np.exp(-((omega / omega_edge) ** order))

    return apodized


def propagate_farfield(
    f,
    source: SpdcSource,
    fiber: FiberChannel,
    tau_prime,
    delay: DelayState | None = None,
) -> np.ndarray:
    """Closed-form spread amplitude for a long fiber.

    ``(4 pi i k'' z)^(-1/2) exp(i tau'^2/(4 k'' z)) f(tau'/(2 k'' z))``
    evaluated on the shifted time axis.  ``f`` is any spectral amplitude
    (bare sinc, polarizer-projected, apodized, ...).

    A warning is issued when ``tau_f < 10 * tau0_eff``: the fiber is then
    too short for the stationary-phase form to be trustworthy and the exact
    propagator should be preferred.
    """
    chirp = fiber.chirp_s2
    if chirp == 0.0:
        raise ZeroDivisionError("far-field propagation requires k'' z != 0")
    tau0_eff = delay.tau0_eff if delay is not None else source.tau0
    tau_f = spread_scale(source, fiber).tau_f
    if abs(tau_f) < 10.0 * abs(tau0_eff):
        warnings.warn(
            "far-field form marginal: tau_f < 10 * tau0_eff; "
            "use propagate_exact for quantitative work",
            stacklevel=2,
        )
    tau_prime = np.asarray(tau_prime, dtype=float)
    prefactor = 1.0 / np.sqrt(4.0 * math.pi * 1j * chirp)
    phase = np.exp(1j * tau_prime**2 / (4.0 * chirp))
    return prefactor * phase * np.asarray(f(tau_prime / (2.0 * chirp)), dtype=complex)


def _sinc(x: np.ndarray) -> np.ndarray:
    return np.sinc(x / math.pi)


def _g2_generic(
    a: float,
    b: float,
    x: np.ndarray,
    kappa: float,
    eps: float,
    drift_visibility: float,
    simplified: bool,
) -> np.ndarray:
    """|a F(tau + tau_eff) + b F(tau - tau_eff)|^2 after spreading.

    ``a, b`` are the analyzer prefactors, ``x = tau'/tau_f`` and
    ``eps = tau0_eff/tau_f`` the displacement of each component in envelope
    units.  The cross term (the only part sensitive to a relative phase
    between the two polarization components) is scaled by the
    interference-visibility factor modelling polarization drift.

    The exact-form cross phase ``2 kappa x`` is the difference of the two
    quadratic propagation phases and involves no approximation; ``simplified``
    only collapses the two displaced envelopes onto a common one.
    """
    v = drift_visibility
    modulation = np.cos(2.0 * kappa * x)
    if simplified:
        env = _sinc(x) ** 2
        return (a * a + b * b) * env + 2.0 * a * b * v * env * modulation
    s_plus = _sinc(x + eps)   # component displaced to tau' = -tau0_eff
    s_minus = _sinc(x - eps)  # component displaced to tau' = +tau0_eff
    return (
        a * a * s_plus**2
        + b * b * s_minus**2
        + 2.0 * a * b * v * s_plus * s_minus * modulation
    )


def _use_simplified(tau_f: float, tau0_eff: float, simplified: bool | None) -> bool:
    if simplified is not None:
        return simplified
    return abs(tau_f) >= 10.0 * abs(tau0_eff)


def g2_pm_analytic(
    source: SpdcSource,
    fiber: FiberChannel,
    sign: int,
    drift_visibility: float,
    tau_prime,
    delay: DelayState | None = None,
    simplified: bool | None = None,
) -> np.ndarray:
    """Spread intensity correlation for the two canonical analyzer settings.

    ``sign=+1`` is the constructive pair (both analyzers at +45 deg),
    ``sign=-1`` the destructive one (-45/+45).  In the long-fiber regime the
    normalized forms are

        G+ = sin^2(x) cos^2(kappa x) / x^2
        G- = sin^2(x) sin^2(kappa x) / x^2,   x = tau'/tau_f

    so G+ peaks at 1 at the center while G- vanishes there; a drift
    visibility V < 1 fills the fringes in as ``(1 +- V cos 2 kappa x)/2``
    times the envelope.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if delay is None:
        delay = DelayState(tau0_eff=source.tau0, kappa=1.0)
    scale = spread_scale(source, fiber)
    x = np.asarray(tau_prime, dtype=float) / scale.tau_f
    a = 0.5
    b = 0.5 if sign > 0 else -0.5
    return _g2_generic(
        a,
        b,
        x,
        delay.kappa,
        delay.tau0_eff / scale.tau_f,
        drift_visibility,
        _use_simplified(scale.tau_f, delay.tau0_eff, simplified),
    )


def g2_plate_analytic(
    source: SpdcSource,
    fiber: FiberChannel,
    delay: DelayState,
    sign: int,
    drift_visibility: float,
    tau_prime,
    simplified: bool | None = None,
) -> np.ndarray:
    """Plate-modified spread correlation; reduces to :func:`g2_pm_analytic`
    at ``kappa = 1``.

    The envelope keeps the bare-crystal scale ``tau_f``; only the modulation
    argument is rescaled by ``kappa``.  At ``kappa = 0`` the destructive
    correlation vanishes identically and the constructive one is the plain
    envelope.
    """
    return g2_pm_analytic(
        source, fiber, sign, drift_visibility, tau_prime, delay=delay, simplified=simplified
    )


def g2_analyzer_analytic(
    source: SpdcSource,
    fiber: FiberChannel,
    settings: AnalyzerSettings,
    tau_prime,
    delay: DelayState | None = None,
    drift_visibility: float = 1.0,
    simplified: bool | None = None,
) -> np.ndarray:
    """Spread correlation for arbitrary analyzer angles.

    Normalized so that the sum over an orthogonal pair of settings equals
    the unpolarized envelope: interference redistributes coincidences in
    time, it never creates them.
    """
    if delay is None:
        delay = DelayState(tau0_eff=source.tau0, kappa=1.0)
    scale = spread_scale(source, fiber)
    x = np.asarray(tau_prime, dtype=float) / scale.tau_f
    a = math.cos(settings.theta1) * math.sin(settings.theta2)
    b = math.cos(settings.theta2) * math.sin(settings.theta1)
    return _g2_generic(
        a,
        b,
        x,
        delay.kappa,
        delay.tau0_eff / scale.tau_f,
        drift_visibility,
        _use_simplified(scale.tau_f, delay.tau0_eff, simplified),
    )


def g2_unpolarized(
    source: SpdcSource,
    fiber: FiberChannel,
    tau_prime,
    delay: DelayState | None = None,
    simplified: bool | None = None,
) -> np.ndarray:
    """Spread correlation with no polarization selection.

    The two polarization-tagged components add incoherently with unit
    weight each, giving twice the mapped envelope ``sinc^2(tau'/tau_f)``
    (the two displaced envelopes are resolved in the exact form).  Equals
    ``2 (G+ + G-)`` pointwise: analyzers at +-45 degrees pass half the
    unpolarized flux, which fixes the relative normalization used by the
    windowed counting statistics.
    """
    if delay is None:
        delay = DelayState(tau0_eff=source.tau0, kappa=1.0)
    scale = spread_scale(source, fiber)
    x = np.asarray(tau_prime, dtype=float) / scale.tau_f
    eps = delay.tau0_eff / scale.tau_f
    if _use_simplified(scale.tau_f, delay.tau0_eff, simplified):
        return 2.0 * _sinc(x) ** 2
    return _sinc(x + eps) ** 2 + _sinc(x - eps) ** 2


def envelope_fwhm(source: SpdcSource, fiber: FiberChannel) -> float:
    """FWHM of the unconvolved spread envelope, ``2.7831 * tau_f``.

    The constant is twice the root of ``sinc^2(x) = 1/2``.
    """
    return 2.0 * 1.3915573810029 * abs(spread_scale(source, fiber).tau_f)
