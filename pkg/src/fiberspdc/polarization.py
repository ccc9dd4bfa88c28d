"""Polarizer projection and birefringent-plate delay bookkeeping.

After the beamsplitter, the pair state carries two indistinguishable-in
-principle terms (H in arm 1 with V in arm 2, and vice versa) whose relative
phase oscillates as ``exp(+-i omega tau0)`` with the e-o delay ``tau0``
accumulated in the crystal.  Projecting each arm on a linear polarizer at
angles ``theta1, theta2`` replaces the spectral amplitude ``F(omega)`` by

    F'(omega) = F(omega) * { sin(theta1+theta2) cos(omega tau_eff)
                             - i sin(theta1-theta2) sin(omega tau_eff) }

where ``tau_eff`` is the crystal delay plus any plate contributions.  In the
time domain the same projection is a superposition of the rectangle
displaced by ``+-tau_eff``; for the bare crystal the two displaced
rectangles do not overlap, so the intensity correlation shows no
interference until the amplitudes are spread (by a dispersive fiber) enough
to overlap.

Birefringent plates inserted after the crystal only add a signed delay: a
plate with its axis parallel to the crystal plane reduces the e-o delay
(negative contribution), an orthogonal one increases it.  The whole effect
is captured by the ratio ``kappa = tau_eff / tau0`` which rescales the
interference modulation but not the spectral envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .source import SpdcSource, temporal_amplitude_analytic

MODE_TWO_POLARIZERS = "two-polarizers-after-beamsplitter"
MODE_SINGLE_POLARIZER = "single-polarizer-before-fiber"
_MODES = (MODE_TWO_POLARIZERS, MODE_SINGLE_POLARIZER)


def reduce_angle(theta: float) -> float:
    """Reduce a polarizer angle modulo pi into ``(-pi/2, pi/2]``."""
    r = math.remainder(theta, math.pi)
    if r <= -math.pi / 2.0:
        r += math.pi
    return r


@dataclass(frozen=True)
class AnalyzerSettings:
    """Orientations of the two analyzers and where they sit in the chain.

    In single-polarizer mode one physical prism before the fiber plays the
    role of both analyzers, so the two angles must coincide.
    """

    theta1: float
    theta2: float
    mode: str = MODE_TWO_POLARIZERS

    def __post_init__(self) -> None:
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        object.__setattr__(self, "theta1", reduce_angle(self.theta1))
        object.__setattr__(self, "theta2", reduce_angle(self.theta2))
        if self.mode == MODE_SINGLE_POLARIZER and self.theta1 != self.theta2:
            raise ValueError("single-polarizer mode requires theta1 == theta2")

    def coefficients(self) -> tuple[float, float]:
        """``(sin(theta1+theta2), sin(theta1-theta2))`` -- the only two
        combinations any coincidence rate can depend on."""
        return (
            math.sin(self.theta1 + self.theta2),
            math.sin(self.theta1 - self.theta2),
        )


ORIENTATION_PARALLEL = "parallel"
ORIENTATION_ORTHOGONAL = "orthogonal"


@dataclass(frozen=True)
class BirefringentPlate:
    """A plate adding a signed delay between the orthogonal polarizations.

    ``parallel`` orientation (optic axis in the crystal plane) reduces the
    e-o delay, so its contribution is negative; ``orthogonal`` increases it.
    """

    delay_s: float
    orientation: str = field(default="")

    def __post_init__(self) -> None:
        orientation = self.orientation
        if orientation == "":
            orientation = (
                ORIENTATION_PARALLEL if self.delay_s < 0 else ORIENTATION_ORTHOGONAL
            )
            object.__setattr__(self, "orientation", orientation)
        if orientation not in (ORIENTATION_PARALLEL, ORIENTATION_ORTHOGONAL):
            raise ValueError("orientation must be 'parallel' or 'orthogonal'")
        if orientation == ORIENTATION_PARALLEL and self.delay_s > 0:
            raise ValueError("parallel plate must carry delay <= 0")
        if orientation == ORIENTATION_ORTHOGONAL and self.delay_s < 0:
            raise ValueError("orthogonal plate must carry delay >= 0")

    @classmethod
    def from_thickness(
        cls, thickness_mm: float, delay_per_mm_s: float, orientation: str
    ) -> "BirefringentPlate":
        """Plate of given thickness; the per-mm delay magnitude is a
        material property supplied by configuration."""
        magnitude = abs(delay_per_mm_s) * thickness_mm
        sign = -1.0 if orientation == ORIENTATION_PARALLEL else 1.0
        return cls(delay_s=sign * magnitude, orientation=orientation)


@dataclass(frozen=True)
class DelayState:
    """Effective e-o delay after plates and its ratio to the bare delay."""

    tau0_eff: float
    kappa: float


NO_PLATES = ()


def effective_delay(source: SpdcSource, plates=NO_PLATES) -> DelayState:
    """Total e-o delay ``tau0 + sum(plate delays)`` and ``kappa``.

    Plates compose additively; order is irrelevant.  Full compensation
    (``kappa = 0``) is a valid state: the destructive-setting correlation
    then vanishes identically downstream.
    """
    tau_eff = source.tau0 + sum(p.delay_s for p in plates)
    return DelayState(tau0_eff=tau_eff, kappa=tau_eff / source.tau0)


def delay_state_from_kappa(source: SpdcSource, kappa: float) -> DelayState:
    """Delay state specified directly by the modulation ratio."""
    return DelayState(tau0_eff=kappa * source.tau0, kappa=kappa)


def project_polarizers(
    source: SpdcSource,
    settings: AnalyzerSettings,
    delay: DelayState,
    omega,
) -> np.ndarray:
    """Spectral amplitude after both analyzers (two-polarizer mode).

    ``F(omega) * {sin(t1+t2) cos(omega tau_eff) - i sin(t1-t2) sin(omega tau_eff)}``
    """
    if settings.mode != MODE_TWO_POLARIZERS:
        raise ValueError("project_polarizers applies to two-polarizer mode only")
    from .source import sinc_spectral_amplitude

    omega = np.asarray(omega, dtype=float)
    c_plus, c_minus = settings.coefficients()
    phase = omega * delay.tau0_eff
    return sinc_spectral_amplitude(source, omega) * (
        c_plus * np.cos(phase) - 1j * c_minus * np.sin(phase)
    )


def temporal_superposition(
    source: SpdcSource,
    settings: AnalyzerSettings,
    delay: DelayState,
    tau,
) -> np.ndarray:
    """Time-domain amplitude after the analyzers.

    ``cos(t1) sin(t2) F(tau + tau_eff) + cos(t2) sin(t1) F(tau - tau_eff)``
    with the crystal rectangle ``F``.  Its Fourier transform reproduces
    :func:`project_polarizers`; the prefactor assignment fixes which photon
    is labeled extraordinary, and the opposite choice only mirrors the time
    axis.
    """
    tau = np.asarray(tau, dtype=float)
    a = math.cos(settings.theta1) * math.sin(settings.theta2)
    b = math.cos(settings.theta2) * math.sin(settings.theta1)
    return a * temporal_amplitude_analytic(source, tau + delay.tau0_eff) + (
        b * temporal_amplitude_analytic(source, tau - delay.tau0_eff)
    )
