# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled event kernel: same counter-based stream as ``_mc_numpy``.

One tight C loop over events; see the fallback module for the stream
definition.  Kept intentionally small: inverse-CDF draw, Box-Muller jitter,
channel binning.
"""

from libc.math cimport cos, floor, log, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    #define FSPDC_GOLDEN 0x9E3779B97F4A7C15ULL
    #define FSPDC_MIX1   0xBF58476D1CE4E5B9ULL
    #define FSPDC_MIX2   0x94D049BB133111EBULL
    """
    unsigned long long FSPDC_GOLDEN
    unsigned long long FSPDC_MIX1
    unsigned long long FSPDC_MIX2

DEF U53 = 1.0 / 9007199254740992.0
DEF TWO_PI = 6.283185307179586476925287

LANES_PER_EVENT = 3


cdef inline unsigned long long _mix64(unsigned long long z) nogil:
    z = (z ^ (z >> 30)) * FSPDC_MIX1
    z = (z ^ (z >> 27)) * FSPDC_MIX2
    return z ^ (z >> 31)


cdef inline double _uniform(unsigned long long seed, unsigned long long counter) nogil:
    cdef unsigned long long bits = _mix64(seed + (counter + 1ULL) * FSPDC_GOLDEN)
    return <double>(bits >> 11) * U53


cdef inline Py_ssize_t _locate(const double[::1] inner, double u) nogil:
    # first index j with inner[j] > u (inner = cdf[1:-1]); binary search
    cdef Py_ssize_t lo = 0, hi = inner.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if inner[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


def event_delays(
    unsigned long long seed,
    unsigned long long first_event,
    Py_ssize_t n_events,
    const double[::1] cdf,
    double t_start,
    double bin_width,
    const double[::1] scales,
    double jitter_sigma,
):
    """Jittered coincidence delays for events [first_event, first_event+n)."""
    out = np.empty(n_events, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef const double[::1] inner = cdf[1 : cdf.shape[0] - 1]
    cdef Py_ssize_t i, j
    cdef unsigned long long base
    cdef double u, t, r
    with nogil:
        for i in range(n_events):
            base = (first_event + <unsigned long long>i) * 3ULL
            u = _uniform(seed, base)
            j = _locate(inner, u)
            t = t_start + j * bin_width + (u - cdf[j]) * scales[j]
            if jitter_sigma > 0.0:
                r = sqrt(-2.0 * log(1.0 - _uniform(seed, base + 1ULL)))
                t = t + jitter_sigma * r * cos(TWO_PI * _uniform(seed, base + 2ULL))
            out_v[i] = t
    return out


def sample_events(
    unsigned long long seed,
    unsigned long long first_event,
    Py_ssize_t n_events,
    const double[::1] cdf,
    double t_start,
    double bin_width,
    const double[::1] scales,
    double jitter_sigma,
    double window_start,
    double channel_width,
    Py_ssize_t n_channels,
):
    """Histogram of jittered delays over the analyzer channels."""
    counts = np.zeros(n_channels, dtype=np.int64)
    cdef long long[::1] counts_v = counts
    cdef const double[::1] inner = cdf[1 : cdf.shape[0] - 1]
    cdef Py_ssize_t i, j
    cdef unsigned long long base
    cdef double u, t, r, pos
    with nogil:
        for i in range(n_events):
            base = (first_event + <unsigned long long>i) * 3ULL
            u = _uniform(seed, base)
            j = _locate(inner, u)
            t = t_start + j * bin_width + (u - cdf[j]) * scales[j]
            if jitter_sigma > 0.0:
                r = sqrt(-2.0 * log(1.0 - _uniform(seed, base + 1ULL)))
                t = t + jitter_sigma * r * cos(TWO_PI * _uniform(seed, base + 2ULL))
            pos = floor((t - window_start) / channel_width)
            if 0.0 <= pos < <double>n_channels:
                counts_v[<Py_ssize_t>pos] += 1
    return counts
