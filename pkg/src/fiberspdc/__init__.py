"""Fiber-spread two-photon interference: simulation and analysis toolkit.

Type-II downconversion pairs propagated through a dispersive single-mode
fiber arrive with their intensity correlation stretched from ~100 fs to
nanoseconds, wide enough for photon-counting electronics to resolve the
polarization-interference structure imprinted by the source.  This package
computes the spread correlation functions, generates realistic coincidence
histograms (timing jitter, finite channels, accidental background), and
recovers physical parameters (fiber dispersion, interference visibility,
the windowed Bell-type statistic R) by fitting.

The Monte Carlo event loop runs on a compiled kernel when the extension was
built, with an equivalent NumPy fallback otherwise; ``kernel.BACKEND``
reports the selection.
"""

from .analysis import (
    BellResult,
    CenterRatio,
    DegenerateHistogramError,
    FitConvergenceError,
    FitResult,
    ProfileRangeError,
    UndefinedVisibilityError,
    bell_R,
    bell_measurement,
    center_ratio,
    evaluate_fit_model,
    fit_spread_peak,
    format_bell_report,
    format_fit_report,
    fringe_scan,
    fwhm,
    scan_visibility,
    visibility,
)
from .config import (
    FIGURE_PRESETS,
    QUARTZ_DELAY_PER_MM_S,
    ConfigError,
    ExperimentConfig,
    default_config,
    format_config,
    parse_config,
    preset_1km,
)
from .detection import (
    CoincidenceHistogram,
    DetectionChain,
    WindowRangeError,
    expected_channel_counts,
    jitter_convolve,
    read_histogram,
    simulate_histogram,
    window_counts,
    write_histogram,
)
from .dispersion import (
    FiberChannel,
    GridResolutionError,
    SpreadScale,
    band_limited,
    envelope_fwhm,
    g2_analyzer_analytic,
    g2_pm_analytic,
    g2_plate_analytic,
    g2_unpolarized,
    propagate_exact,
    propagate_farfield,
    spread_scale,
    suggest_propagation_grid,
)
from .kernel import BACKEND
from .polarization import (
    AnalyzerSettings,
    BirefringentPlate,
    DelayState,
    delay_state_from_kappa,
    effective_delay,
    project_polarizers,
    temporal_superposition,
)
from .source import (
    DomainError,
    FrequencyGrid,
    SampledAmplitude,
    SpdcSource,
    default_grid,
    g1,
    g1_sampled,
    sample_spectral,
    sinc_spectral_amplitude,
    temporal_amplitude_analytic,
    to_frequency_domain,
    to_time_domain,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
