"""Backend selection and shared stream utilities for the event kernel.

The hot loop of the package -- drawing millions of coincidence delays and
binning them -- exists twice: a Cython extension (``_mc_core``) and a
vectorized NumPy fallback (``_mc_numpy``) with the identical counter-based
stream.  The extension is preferred when the build produced it; otherwise
the fallback is selected silently at import.  ``BACKEND`` records the
choice and ``available_backends`` exposes both for tests and benchmarks.

Determinism contract: one seed plus one event-index range defines the
output completely.  Events are addressed by absolute index (three stream
lanes each), so generation may be sharded arbitrarily across workers and
merged by addition without affecting the result.
"""

from __future__ import annotations

import numpy as np

from . import _mc_numpy

try:  # pragma: no cover - depends on the build environment
    from . import _mc_core

    _impl = _mc_core
    BACKEND = "compiled"
except ImportError:  # pragma: no cover
    _impl = _mc_numpy
    BACKEND = "numpy"

# Re-exported stream primitives (single definition, used by both backends
# and by the accidental-background generator).
GOLDEN = _mc_numpy.GOLDEN
mix64 = _mc_numpy.mix64
counter_uniforms = _mc_numpy.counter_uniforms
LANES_PER_EVENT = _mc_numpy.LANES_PER_EVENT

_EVENT_STREAM_TAG = 0x45564E54  # 'EVNT'
_ACCIDENTAL_STREAM_TAG = 0x41434344  # 'ACCD'


def available_backends() -> dict:
    """Mapping backend name -> kernel module, for benchmarks and tests."""
    backends = {"numpy": _mc_numpy}
    if _impl is not _mc_numpy:
        backends["compiled"] = _impl
    return backends


def derive_seed(seed: int, tag: int) -> int:
    """Decorrelated 64-bit sub-seed for an independent stream."""
    arr = np.array([(seed ^ tag) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return int(mix64(arr + GOLDEN)[0])


def event_stream_seed(seed: int) -> int:
    return derive_seed(seed, _EVENT_STREAM_TAG)


def accidental_stream_seed(seed: int) -> int:
    return derive_seed(seed, _ACCIDENTAL_STREAM_TAG)


class EmptyModelError(ValueError):
    """The sampled model has no probability mass on the grid."""


def build_sampler_tables(weights: np.ndarray, bin_width: float):
    """CDF and per-bin interpolation scales for inverse-CDF sampling.

    ``weights`` are nonnegative bin masses on a uniform grid of step
    ``bin_width``.  The returned ``scales[j]`` converts a CDF residual
    ``u - cdf[j]`` directly into a time offset inside bin ``j``; both
    backends consume the same precomputed arrays so their float paths are
    operation-for-operation identical.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise ValueError("model weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0.0:
        raise EmptyModelError("model has zero total mass on the sampling grid")
    cdf = np.empty(w.size + 1, dtype=np.float64)
    cdf[0] = 0.0
    np.cumsum(w / total, out=cdf[1:])
    cdf[-1] = 1.0
    diffs = np.diff(cdf)
    # zero-mass bins are never selected by the right-biased search
    scales = np.where(diffs > 0.0, bin_width / np.where(diffs > 0.0, diffs, 1.0), 0.0)
    return cdf, scales


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
    backend=None,
) -> np.ndarray:
    """Draw and bin ``n_events`` coincidences; returns int64 channel counts."""
    impl = available_backends()[backend] if backend else _impl
    return impl.sample_events(
        seed,
        first_event,
        int(n_events),
        np.ascontiguousarray(cdf, dtype=np.float64),
        float(t_start),
        float(bin_width),
        np.ascontiguousarray(scales, dtype=np.float64),
        float(jitter_sigma),
        float(window_start),
        float(channel_width),
        int(n_channels),
    )


def event_delays(
    seed: int,
    first_event: int,
    n_events: int,
    cdf: np.ndarray,
    t_start: float,
    bin_width: float,
    scales: np.ndarray,
    jitter_sigma: float,
    backend=None,
) -> np.ndarray:
    """Jittered delays themselves (diagnostics and backend cross-checks)."""
    impl = available_backends()[backend] if backend else _impl
    return impl.event_delays(
        seed,
        first_event,
        int(n_events),
        np.ascontiguousarray(cdf, dtype=np.float64),
        float(t_start),
        float(bin_width),
        np.ascontiguousarray(scales, dtype=np.float64),
        float(jitter_sigma),
    )


def poisson_counts(seed: int, means, max_lanes: int = 4096) -> np.ndarray:
    """Deterministic Poisson draws, one per entry of ``means``.

    Knuth's product method driven by per-entry counter substreams (entry
    ``c`` owns lanes ``c*max_lanes ...``), so the draws are independent of
    evaluation order and of each other.  Means above 256 switch to the
    Gaussian limit (relative error below the per-mille level there), which
    keeps the lane budget bounded.  Runs on the shared stream primitives
    only -- identical under either kernel backend.
    """
    mu = np.atleast_1d(np.asarray(means, dtype=np.float64))
    if np.any(mu < 0.0) or not np.all(np.isfinite(mu)):
        raise ValueError("Poisson means must be finite and >= 0")
    counts = np.zeros(mu.size, dtype=np.int64)
    base = np.arange(mu.size, dtype=np.uint64) * np.uint64(max_lanes)

    large = mu > 256.0
    if np.any(large):
        u1 = counter_uniforms(seed, base[large])
        u2 = counter_uniforms(seed, base[large] + np.uint64(1))
        z = np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(2.0 * np.pi * u2)
        counts[large] = np.maximum(np.rint(mu[large] + np.sqrt(mu[large]) * z), 0.0).astype(
            np.int64
        )

    active = (mu > 0.0) & ~large
    if not np.any(active):
        return counts
    limit = np.exp(-mu)
    prod = np.ones(mu.size, dtype=np.float64)
    lane = 0
    while np.any(active):
        if lane >= max_lanes:  # unreachable: ~mu + 10 sqrt(mu) lanes suffice
            raise RuntimeError("Poisson lane budget exhausted")
        u = counter_uniforms(seed, base[active] + np.uint64(lane))
        prod[active] *= u
        still = prod[active] > limit[active]
        counts[np.flatnonzero(active)[still]] += 1
        nxt = active.copy()
        nxt[np.flatnonzero(active)[~still]] = False
        active = nxt
        lane += 1
    return counts
