"""Two-photon source model and sampled-amplitude machinery.

A collinear, frequency-degenerate type-II downconversion source pumped by a
cw laser emits photon pairs whose joint state is fully described by a single
complex function of the frequency offset: the two-photon spectral amplitude
``F(omega)``.  For a crystal of length ``L`` with inverse group-velocity
mismatch ``D`` between the ordinary and extraordinary photons the amplitude
is the familiar sinc, and its Fourier transform (the two-photon amplitude in
the time of arrival difference ``tau``) is a rectangle of width ``2*tau0``
with ``tau0 = D*L/2``.

This module provides:

* :class:`SpdcSource` -- crystal parameters and the derived e-o delay,
* :func:`sinc_spectral_amplitude` / :func:`temporal_amplitude_analytic` --
  the closed-form amplitudes,
* :func:`g1` -- the first-order (field) correlation, a triangle for this
  source, which is insensitive to any spectral phase,
* :class:`FrequencyGrid` / :class:`SampledAmplitude` and the discrete
  Fourier pairing between the spectral and temporal representations.

The discrete transform pair is unitary (symmetric ``1/sqrt(2*pi)``
normalization), so Parseval's identity holds between the two domains with
the natural ``sum(|v|^2) * spacing`` norm.  Physical intensity-correlation
outputs elsewhere in the package are in arbitrary units, so the choice of
normalization carries no physical content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi

# Degenerate wavelength of a 351 nm-pumped source; informational only, no
# in-scope quantity depends on the absolute optical frequency.
DEFAULT_DEGENERATE_WAVELENGTH_NM = 702.0
_C_M_PER_S = 299792458.0


class DomainError(ValueError):
    """A sampled amplitude was used in the wrong (spectral/temporal) domain."""


def degenerate_angular_frequency(wavelength_nm: float) -> float:
    """Angular frequency (rad/s) for a vacuum wavelength in nm."""
    return TWO_PI * _C_M_PER_S / (wavelength_nm * 1e-9)


@dataclass(frozen=True)
class SpdcSource:
    """Type-II downconversion crystal parameters.

    Parameters
    ----------
    crystal_length_mm:
        Crystal length ``L`` in mm, strictly positive.
    gv_mismatch_s_per_mm:
        Inverse group-velocity difference ``D = 1/u_o - 1/u_e`` between the
        orthogonally polarized photons, in s/mm.  Must be nonzero.
    degenerate_frequency_rad_s:
        Central angular frequency of the pair spectrum (half the pump
        frequency).  Informational; defaults to the 702 nm point.
    """

    crystal_length_mm: float
    gv_mismatch_s_per_mm: float
    degenerate_frequency_rad_s: float = degenerate_angular_frequency(
        DEFAULT_DEGENERATE_WAVELENGTH_NM
    )

    def __post_init__(self) -> None:
        if not self.crystal_length_mm > 0.0:
            raise ValueError("crystal_length_mm must be > 0")
        if self.gv_mismatch_s_per_mm == 0.0:
            raise ValueError("gv_mismatch_s_per_mm must be nonzero")

    @property
    def tau0(self) -> float:
        """e-o group delay ``D*L/2`` accumulated in the crystal (seconds).

        Always recomputed from the fields so it can never drift out of sync.
        """
        return 0.5 * self.gv_mismatch_s_per_mm * self.crystal_length_mm


def sinc_spectral_amplitude(source: SpdcSource, omega) -> np.ndarray | float:
    """Two-photon spectral amplitude ``sin(D L omega / 2)/(D L omega / 2)``.

    Real-valued and even in the frequency offset; equals 1 at ``omega = 0``
    (the removable singularity is evaluated by its analytic limit, never by
    division).
    """
    # np.sinc(x) = sin(pi x)/(pi x); the argument here is tau0*omega = D*L*omega/2.
    return np.sinc(np.asarray(omega) * (source.tau0 / math.pi))


def temporal_amplitude_analytic(source: SpdcSource, tau) -> np.ndarray | float:
    """Rectangular two-photon amplitude of width ``2*tau0``, unit integral.

    Returns ``1/(2*tau0)`` for ``|tau| < tau0``, half that value exactly at
    the edges (the Fourier midpoint convention; irrelevant to any integral
    quantity), and 0 outside.
    """
    t0 = abs(source.tau0)
    tau = np.asarray(tau, dtype=float)
    inner = 1.0 / (2.0 * t0)
    out = np.where(np.abs(tau) < t0, inner, 0.0)
    out = np.where(np.abs(tau) == t0, 0.5 * inner, out)
    if out.ndim == 0:
        return float(out)
    return out


def g1(source: SpdcSource, tau) -> np.ndarray | float:
    """Normalized first-order correlation of the pair light.

    For the sinc amplitude this is the autocorrelation of the rectangle: a
    triangle of base ``4*tau0``, i.e. ``max(0, 1 - |tau|/(2*tau0))``, equal
    to 1 at ``tau = 0``.  It carries no spectral phase, which is why it is
    unchanged by dispersive propagation.
    """
    t0 = abs(source.tau0)
    tau = np.asarray(tau, dtype=float)
    out = np.maximum(0.0, 1.0 - np.abs(tau) / (2.0 * t0))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid of frequency offsets centered on zero.

    ``n_samples`` must be a power of two.  The grid covers
    ``[-omega_max, omega_max)`` with spacing ``2*omega_max/n_samples``; the
    conjugate time grid has spacing ``pi/omega_max`` and spans
    ``2*pi/d_omega``.
    """

    n_samples: int
    omega_max: float

    def __post_init__(self) -> None:
        n = self.n_samples
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError("n_samples must be a power of two >= 2")
        if not self.omega_max > 0.0:
            raise ValueError("omega_max must be > 0")

    @property
    def d_omega(self) -> float:
        return 2.0 * self.omega_max / self.n_samples

    @property
    def d_tau(self) -> float:
        return math.pi / self.omega_max

    @property
    def time_span(self) -> float:
        return TWO_PI / self.d_omega

    def omegas(self) -> np.ndarray:
        return (np.arange(self.n_samples) - self.n_samples // 2) * self.d_omega

    def taus(self) -> np.ndarray:
        return (np.arange(self.n_samples) - self.n_samples // 2) * self.d_tau


def default_grid(source: SpdcSource, n_samples: int = 2**14, lobes: float = 20.0) -> FrequencyGrid:
    """Grid wide enough to keep ``lobes`` sinc lobes on each side.

    20 lobes truncate well under 1% of the spectral energy while keeping
    transforms instant.
    """
    omega_max = lobes * math.pi / abs(source.tau0)
    return FrequencyGrid(n_samples=n_samples, omega_max=omega_max)


@dataclass(frozen=True)
class SampledAmplitude:
    """Complex amplitude sampled on a grid, tagged spectral or temporal."""

    grid: FrequencyGrid
    values: np.ndarray
    domain: str  # "spectral" | "temporal"

    def __post_init__(self) -> None:
        if self.domain not in ("spectral", "temporal"):
            raise DomainError(f"unknown domain tag {self.domain!r}")
        v = np.asarray(self.values)
        if v.shape != (self.grid.n_samples,):
            raise ValueError("values length must equal grid.n_samples")

    @property
    def spacing(self) -> float:
        return self.grid.d_omega if self.domain == "spectral" else self.grid.d_tau

    def axis(self) -> np.ndarray:
        return self.grid.omegas() if self.domain == "spectral" else self.grid.taus()

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.spacing)

    def normalized(self) -> "SampledAmplitude":
        n2 = self.norm_squared()
        if not (n2 > 0.0 and math.isfinite(n2)):
            raise ValueError("cannot normalize amplitude with zero or non-finite norm")
        return SampledAmplitude(self.grid, self.values / math.sqrt(n2), self.domain)


def sample_spectral(f: Callable[[np.ndarray], np.ndarray], grid: FrequencyGrid) -> SampledAmplitude:
    """Sample a spectral-amplitude function on the grid."""
    values = np.asarray(f(grid.omegas()), dtype=complex)
    return SampledAmplitude(grid=grid, values=values, domain="spectral")


def to_time_domain(a: SampledAmplitude) -> SampledAmplitude:
    """Unitary transform of a spectral amplitude to the time domain.

    Implements the continuum pairing
    ``F(tau) = (2*pi)**-0.5 * integral F(omega) exp(+i omega tau) d omega``
    on the centered grids, so a round trip is the identity and the L2 norms
    of the two domains coincide (both to accumulated rounding, ~1e-12).
    """
    if a.domain != "spectral":
        raise DomainError("to_time_domain requires a spectral amplitude")
    n = a.grid.n_samples
    scale = n * a.grid.d_omega / math.sqrt(TWO_PI)
    values = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(a.values))) * scale
    return SampledAmplitude(grid=a.grid, values=values, domain="temporal")


def to_frequency_domain(a: SampledAmplitude) -> SampledAmplitude:
    """Inverse of :func:`to_time_domain`."""
    if a.domain != "temporal":
        raise DomainError("to_frequency_domain requires a temporal amplitude")
    scale = a.grid.d_tau / math.sqrt(TWO_PI)
    values = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(a.values))) * scale
    return SampledAmplitude(grid=a.grid, values=values, domain="spectral")


def g1_sampled(a: SampledAmplitude, taus) -> np.ndarray:
    """First-order correlation computed from a sampled spectral amplitude.

    Evaluates ``integral |F(omega)|^2 exp(i omega tau) d omega`` directly on
    the grid, normalized to 1 at ``tau = 0``.  Only the magnitude of the
    spectrum enters, so the result is invariant under any pure spectral
    phase (e.g. dispersive propagation).
    """
    if a.domain != "spectral":
        raise DomainError("g1_sampled requires a spectral amplitude")
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    weight = np.abs(a.values) ** 2
    phases = np.exp(1j * np.outer(taus, a.axis()))
    out = phases @ weight
    return np.real(out) / np.sum(weight)
