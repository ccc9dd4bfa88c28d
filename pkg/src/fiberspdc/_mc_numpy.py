"""Pure-NumPy event kernel: counter-based sampling of coincidence delays.

Reference implementation of the event stream also provided by the compiled
extension ``_mc_core``.  Every event ``i`` owns three fixed lanes of a
splitmix64 counter sequence, so any sharding of the index range reproduces
the single-shot result exactly and merging shards is plain addition.

Per event:

* lane 0 -> uniform ``u'' -> inverse-CDF draw of the true delay from the
  piecewise-constant gridded model,
* lanes 1, 2 -> Box-Muller standard normal scaled to the detector jitter,
* the jittered delay is binned into the analyzer channel, out-of-range
  events are dropped.

The integer stream is bit-exact across backends by construction; the float
path uses ``log``/``cos`` whose library implementations may differ by 1 ulp
from C libm on some platforms, which can only move an event between
channels if its delay lands within ~1e-16 relative of a channel edge.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / 9007199254740992.0  # 2**-53
LANES_PER_EVENT = 3


def mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 output function (vectorized, wrapping uint64)."""
    z = x.astype(np.uint64, copy=True)
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


def counter_uniforms(seed: int, counters: np.ndarray) -> np.ndarray:
    """Uniforms in [0, 1) addressed by absolute counter index."""
    c = counters.astype(np.uint64, copy=False)
    bits = mix64(np.uint64(seed) + (c + np.uint64(1)) * GOLDEN)
    return (bits >> np.uint64(11)).astype(np.float64) * _U53


def _event_lanes(seed: int, first_event: int, n_events: int):
    idx = np.arange(first_event, first_event + n_events, dtype=np.uint64)
    base = idx * np.uint64(LANES_PER_EVENT)
    u_pick = counter_uniforms(seed, base)
    u_r = counter_uniforms(seed, base + np.uint64(1))
    u_phi = counter_uniforms(seed, base + np.uint64(2))
    return u_pick, u_r, u_phi


def _invert_cdf(
    u: np.ndarray, cdf: np.ndarray, t_start: float, bin_width: float, scales: np.ndarray
) -> np.ndarray:
    # first bin j with cdf[j + 1] > u; zero-mass bins are never selected
    j = np.searchsorted(cdf[1:-1], u, side="right")
    return t_start + j * bin_width + (u - cdf[j]) * scales[j]


def event_delays(
    seed: int,
    first_event: int,
    n_events: int,
    cdf: np.ndarray,
    t_start: float,
    bin_width: float,
    scales: np.ndarray,
    jitter_sigma: float,
) -> np.ndarray:
    """Jittered coincidence delays for events [first_event, first_event+n)."""
    u_pick, u_r, u_phi = _event_lanes(seed, first_event, n_events)
    t = _invert_cdf(u_pick, cdf, t_start, bin_width, scales)
    if jitter_sigma > 0.0:
        r = np.sqrt(-2.0 * np.log(1.0 - u_r))
        t = t + jitter_sigma * r * np.cos(2.0 * np.pi * u_phi)
    return t


def sample_events(
    seed: int,
    first_event: int,
    n_events: int,
    cdf: np.ndarray,
    t_start: float,
    bin_width: float,
    scales: np.ndarray,
    jitter_sigma: float,
    window_start: float,
    channel_width: float,
    n_channels: int,
) -> np.ndarray:
    """Histogram of jittered delays over the analyzer channels."""
    t = event_delays(
        seed, first_event, n_events, cdf, t_start, bin_width, scales, jitter_sigma
    )
    pos = np.floor((t - window_start) / channel_width)
    counts = np.zeros(n_channels, dtype=np.int64)
    keep = (pos >= 0.0) & (pos < n_channels)
    np.add.at(counts, pos[keep].astype(np.int64), 1)
    return counts
