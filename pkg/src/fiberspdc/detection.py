"""Measurement-chain model: jitter, start-stop histogramming, accidentals.

The start-stop electronics convert each photocount-pair time difference into
an analyzer channel; at low flux the resulting histogram reproduces the
intensity correlation function smeared by the detectors' timing response.
This module models that chain as

* a Gaussian two-detector timing response of given FWHM,
* a uniform analyzer with ``n_channels`` channels of fixed width,
* a uniform accidental-coincidence floor, Poisson per channel,

and generates coincidence histograms from any nonnegative correlation model
via the counter-based event kernel (deterministic per seed, shardable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr

from . import kernel

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


class WindowRangeError(ValueError):
    """A counting window does not lie inside the histogram span."""


@dataclass(frozen=True)
class DetectionChain:
    """Timing response and analyzer geometry of the coincidence setup.

    ``jitter_fwhm_s`` is the combined (two-detector) Gaussian response.
    ``window_center_s`` positions the analyzer span on the shifted
    arrival-time axis; with the group delay removed the spread peak sits at
    zero, so the default centers the span there.
    """

    jitter_fwhm_s: float = 750e-12
    channel_width_s: float = 61.4e-12
    n_channels: int = 512
    window_center_s: float = 0.0
    accidentals_per_channel: float = 0.0
    pairs: int = 1_000_000

    def __post_init__(self) -> None:
        if self.jitter_fwhm_s < 0.0:
            raise ValueError("jitter_fwhm_s must be >= 0")
        if not self.channel_width_s > 0.0:
            raise ValueError("channel_width_s must be > 0")
        if self.n_channels < 1:
            raise ValueError("n_channels must be >= 1")
        if self.accidentals_per_channel < 0.0:
            raise ValueError("accidentals_per_channel must be >= 0")
        if self.pairs < 0:
            raise ValueError("pairs must be >= 0")

    @property
    def jitter_sigma_s(self) -> float:
        return self.jitter_fwhm_s * FWHM_TO_SIGMA

    @property
    def span_s(self) -> float:
        return self.n_channels * self.channel_width_s

    @property
    def window_start_s(self) -> float:
        """Left edge of the first channel.

        The grid is aligned so that one channel is centered exactly on
        ``window_center_s`` (the spread peak), which keeps symmetric
        counting windows symmetric in channels.
        """
        return self.window_center_s - (self.n_channels // 2 + 0.5) * self.channel_width_s

    def channel_centers(self) -> np.ndarray:
        return self.window_center_s + (
            np.arange(self.n_channels) - self.n_channels // 2
        ) * self.channel_width_s


@dataclass(frozen=True)
class CoincidenceHistogram:
    """Integer counts per analyzer channel with its time axis and metadata."""

    counts: np.ndarray
    channel_centers_s: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        centers = np.asarray(self.channel_centers_s, dtype=np.float64)
        if counts.ndim != 1 or counts.shape != centers.shape:
            raise ValueError("counts and channel_centers_s must be matching 1-d arrays")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        steps = np.diff(centers)
        if centers.size > 1 and (
            np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9)
        ):
            raise ValueError("time axis must be uniformly increasing")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "channel_centers_s", centers)

    @property
    def channel_width_s(self) -> float:
        if self.channel_centers_s.size < 2:
            return float(self.metadata.get("channel_width_s", 0.0))
        return float(self.channel_centers_s[1] - self.channel_centers_s[0])

    def total_counts(self) -> int:
        return int(self.counts.sum())


def jitter_convolve(times_s: np.ndarray, profile: np.ndarray, jitter_fwhm_s: float) -> np.ndarray:
    """Convolve a sampled nonnegative profile with the timing response.

    Unit-area Gaussian of the given FWHM, discretized on the profile's own
    grid; FWHM 0 is the identity.  The profile must decay within its span
    for the total integral to be preserved (guaranteed to 1e-6 relative for
    spans extending a few sigma past the support).
    """
    times_s = np.asarray(times_s, dtype=float)
    profile = np.asarray(profile, dtype=float)
    if times_s.ndim != 1 or times_s.shape != profile.shape:
        raise ValueError("times and profile must be matching 1-d arrays")
    if np.any(profile < 0.0):
        raise ValueError("profile must be nonnegative")
    if jitter_fwhm_s == 0.0 or times_s.size < 2:
        return profile.copy()
    dt = times_s[1] - times_s[0]
    sigma = jitter_fwhm_s * FWHM_TO_SIGMA
    half = int(math.ceil(6.0 * sigma / dt))
    k = np.arange(-half, half + 1) * dt
    gauss = np.exp(-0.5 * (k / sigma) ** 2)
    gauss /= gauss.sum()
    out = fftconvolve(profile, gauss, mode="same")
    return np.maximum(out, 0.0)


def _sampling_grid(chain: DetectionChain, oversample: int, pad_sigmas: float):
    """Fine grid over the analyzer span padded so edge events can jitter in."""
    h = chain.channel_width_s / oversample
    pad_bins = int(math.ceil(pad_sigmas * chain.jitter_sigma_s / h)) if chain.jitter_sigma_s > 0 else 0
    n_bins = chain.n_channels * oversample + 2 * pad_bins
    t_start = chain.window_start_s - pad_bins * h
    return t_start, h, n_bins


def simulate_histogram(
    model: Callable[[np.ndarray], np.ndarray],
    chain: DetectionChain,
    seed: int,
    first_event: int = 0,
    n_events: int | None = None,
    oversample: int = 8,
    pad_sigmas: float = 6.0,
    metadata: dict | None = None,
    backend: str | None = None,
) -> CoincidenceHistogram:
    """Monte Carlo coincidence histogram for a correlation model.

    ``model`` is the pre-response correlation shape (arbitrary units,
    nonnegative) as a function of the shifted arrival-time difference.  True
    delays are drawn by inverse CDF from the model gridded at
    ``channel_width / oversample`` over the analyzer span padded by
    ``pad_sigmas`` of jitter; each event then receives independent Gaussian
    jitter and is binned.  Uniform accidentals are added as independent
    Poisson counts per channel.

    Fixed ``seed`` (and event-index range) reproduces the histogram exactly;
    ``first_event``/``n_events`` expose the absolute event indexing so
    generation can be sharded and merged by addition.
    """
    t_start, h, n_bins = _sampling_grid(chain, oversample, pad_sigmas)
    grid = t_start + (np.arange(n_bins) + 0.5) * h
    weights = np.asarray(model(grid), dtype=np.float64)
    if weights.shape != grid.shape:
        raise ValueError("model must return one value per grid point")
    if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
        raise ValueError("model must be finite and nonnegative over the span")
    cdf, scales = kernel.build_sampler_tables(weights, h)

    n = chain.pairs if n_events is None else n_events
    counts = kernel.sample_events(
        kernel.event_stream_seed(seed),
        first_event,
        n,
        cdf,
        t_start,
        h,
        scales,
        chain.jitter_sigma_s,
        chain.window_start_s,
        chain.channel_width_s,
        chain.n_channels,
        backend=backend,
    )
    if chain.accidentals_per_channel > 0.0:
        counts = counts + kernel.poisson_counts(
            kernel.accidental_stream_seed(seed),
            np.full(chain.n_channels, chain.accidentals_per_channel),
        )
    meta = {
        "seed": int(seed),
        "pairs": int(n),
        "first_event": int(first_event),
        "jitter_fwhm_s": chain.jitter_fwhm_s,
        "channel_width_s": chain.channel_width_s,
        "n_channels": chain.n_channels,
        "window_center_s": chain.window_center_s,
        "accidentals_per_channel": chain.accidentals_per_channel,
        "kernel_backend": backend or kernel.BACKEND,
    }
    if metadata:
        meta.update(metadata)
    return CoincidenceHistogram(
        counts=counts, channel_centers_s=chain.channel_centers(), metadata=meta
    )


def expected_channel_counts(
    model: Callable[[np.ndarray], np.ndarray],
    chain: DetectionChain,
    n_events: int | None = None,
    oversample: int = 8,
    pad_sigmas: float = 6.0,
) -> np.ndarray:
    """Exact per-channel expectations for :func:`simulate_histogram`.

    Independent of the sampling kernel: integrates the piecewise-constant
    gridded model against the Gaussian response in closed form (normal CDF
    antiderivatives), then adds the accidental mean.  Used as the
    goodness-of-fit oracle for the Monte Carlo.
    """
    t_start, h, n_bins = _sampling_grid(chain, oversample, pad_sigmas)
    grid = t_start + (np.arange(n_bins) + 0.5) * h
    weights = np.asarray(model(grid), dtype=np.float64)
    p = weights / weights.sum()
    n = chain.pairs if n_events is None else n_events

    sigma = chain.jitter_sigma_s
    edges_fine = t_start + np.arange(n_bins + 1) * h
    edges_chan = chain.window_start_s + np.arange(chain.n_channels + 1) * chain.channel_width_s
    if sigma == 0.0:
        # pure rebinning of the staircase density
        cum = np.concatenate([[0.0], np.cumsum(p)])
        pos = np.clip((edges_chan - t_start) / h, 0.0, n_bins)
        j = np.clip(np.floor(pos).astype(int), 0, n_bins - 1)
        frac = pos - j
        cum_at = cum[j] + frac * (cum[np.minimum(j + 1, n_bins)] - cum[j])
        probs = np.diff(cum_at)
    else:
        # antiderivative of the normal CDF: integral Phi(u/s) du
        def g(u):
            return u * ndtr(u / sigma) + sigma**2 * (
                np.exp(-0.5 * (u / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
            )

        # P(event from fine bin j lands in channel i)
        #   = [g(B-a) - g(B-b) - g(A-a) + g(A-b)] / h
        d_upper = edges_chan[None, 1:] - edges_fine[:, None]  # (n_bins+1, n_channels)
        d_lower = edges_chan[None, :-1] - edges_fine[:, None]
        gu = g(d_upper)
        gl = g(d_lower)
        per_bin = (gu[:-1] - gu[1:] - gl[:-1] + gl[1:]) / h
        probs = p @ per_bin
    return n * probs + chain.accidentals_per_channel


def model_mass(
    model: Callable[[np.ndarray], np.ndarray],
    chain: DetectionChain,
    oversample: int = 8,
    pad_sigmas: float = 6.0,
) -> float:
    """Integral of the model over the padded sampling domain (model units x s)."""
    t_start, h, n_bins = _sampling_grid(chain, oversample, pad_sigmas)
    grid = t_start + (np.arange(n_bins) + 0.5) * h
    weights = np.asarray(model(grid), dtype=np.float64)
    return float(weights.sum() * h)


def window_counts(hist: CoincidenceHistogram, center_s: float, width_s: float) -> int:
    """Sum of counts in channels whose centers fall inside the window."""
    if width_s < 0.0:
        raise ValueError("width_s must be >= 0")
    lo = center_s - 0.5 * width_s
    hi = center_s + 0.5 * width_s
    half_ch = 0.5 * hist.channel_width_s
    span_lo = hist.channel_centers_s[0] - half_ch
    span_hi = hist.channel_centers_s[-1] + half_ch
    if lo < span_lo or hi > span_hi:
        raise WindowRangeError(
            f"window [{lo:.3e}, {hi:.3e}] s outside histogram span "
            f"[{span_lo:.3e}, {span_hi:.3e}] s"
        )
    sel = (hist.channel_centers_s >= lo) & (hist.channel_centers_s <= hi)
    return int(hist.counts[sel].sum())


# --- histogram file format -------------------------------------------------
#
# CSV with metadata in '#'-prefixed key=value lines, then the header
# 'channel,time_ns,counts', one row per channel, time in ns with 6 decimal
# places.  Writing is deterministic (insertion-ordered metadata, fixed float
# formatting), so identical histograms produce identical bytes.


def _format_meta_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_meta_value(s: str):
    for caster in (int, float):
        try:
            return caster(s)
        except ValueError:
            continue
    return s


def write_histogram(hist: CoincidenceHistogram, path) -> None:
    lines = []
    for key, value in hist.metadata.items():
        lines.append(f"# {key}={_format_meta_value(value)}")
    lines.append("channel,time_ns,counts")
    for i, (t, c) in enumerate(zip(hist.channel_centers_s, hist.counts)):
        lines.append(f"{i},{t * 1e9:.6f},{int(c)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_histogram(path) -> CoincidenceHistogram:
    metadata: dict = {}
    rows: list[tuple[int, float, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                metadata[key.strip()] = _parse_meta_value(value.strip())
                continue
            if line.startswith("channel,"):
                continue
            ch, t_ns, counts = line.split(",")
            rows.append((int(ch), float(t_ns), int(counts)))
    if not rows:
        raise ValueError(f"no histogram rows in {path}")
    rows.sort(key=lambda r: r[0])
    centers = np.array([r[1] for r in rows]) * 1e-9
    counts = np.array([r[2] for r in rows], dtype=np.int64)
    # reconstruct exact uniform axis from the metadata when available, since
    # the 6-decimal ns column rounds at the femtosecond level
    width = metadata.get("channel_width_s")
    center = metadata.get("window_center_s")
    if isinstance(width, (int, float)) and isinstance(center, (int, float)):
        n = len(rows)
        centers = center + (np.arange(n) - n // 2) * width
    return CoincidenceHistogram(counts=counts, channel_centers_s=centers, metadata=metadata)
