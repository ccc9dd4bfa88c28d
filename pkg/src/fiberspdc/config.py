"""Experiment configuration: flat key = value files with unit suffixes.

The format is INI-like: section headers in brackets choose a key prefix,
each line assigns ``key = value [unit]``.  Fully dotted keys (e.g.
``fiber.length = 1000 m``) are accepted anywhere.  Unknown keys, unit
mismatches, and invariant violations are all reported together with their
line numbers; an empty file yields the documented defaults (the 240 m
preset).

Canonical keys
--------------
source.crystal_length (length), source.gv_mismatch (time/length),
source.degenerate_wavelength (length, informational);
fiber.length (length), fiber.gvd (time^2/length), fiber.group_delay
(time/length);
plates.delays (comma list of signed times) or plates.kappa (dimensionless,
mutually exclusive with delays);
analyzers.theta1, analyzers.theta2 (angle), analyzers.mode
(two-polarizers-after-beamsplitter | single-polarizer-before-fiber | none);
chain.jitter_fwhm, chain.channel_width, chain.window_center (time),
chain.n_channels, chain.pairs (int), chain.accidentals_per_channel (float);
run.drift_visibility (0..1), run.seed (int) -- also accepted bare;
grid.n_samples (int, power of two), grid.lobes (float).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .detection import DetectionChain
from .dispersion import FiberChannel
from .polarization import (
    MODE_SINGLE_POLARIZER,
    MODE_TWO_POLARIZERS,
    AnalyzerSettings,
    BirefringentPlate,
    DelayState,
    delay_state_from_kappa,
    effective_delay,
)
from .source import SpdcSource, degenerate_angular_frequency

MODE_NONE = "none"  # no polarization selection (unpolarized histogram)

# Quartz group-delay mismatch per mm at the pair wavelength; a material
# default for building plate presets, overridable by explicit plate delays.
QUARTZ_DELAY_PER_MM_S = 30e-15


class ConfigError(ValueError):
    """All problems found in a config text, each tagged with its line."""

    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = errors
        super().__init__("; ".join(f"line {ln}: {msg}" for ln, msg in errors))


_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15}
_LENGTH_UNITS_M = {"km": 1e3, "m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_ANGLE_UNITS = {"rad": 1.0, "mrad": 1e-3, "deg": math.pi / 180.0}
_PER_LENGTH_M = _LENGTH_UNITS_M
_MODES = (MODE_TWO_POLARIZERS, MODE_SINGLE_POLARIZER, MODE_NONE)


def _parse_quantity(text: str, units: dict[str, float]) -> float:
    parts = text.split()
    if len(parts) == 1:
        raise ValueError(f"missing unit (expected one of {sorted(units)})")
    if len(parts) != 2:
        raise ValueError(f"expected 'value unit', got {text!r}")
    value, unit = parts
    if unit not in units:
        raise ValueError(f"unit {unit!r} invalid here (expected one of {sorted(units)})")
    return float(value) * units[unit]


def _parse_ratio_quantity(text: str, numer: dict[str, float], denom: dict[str, float],
                          power: int = 1) -> float:
    """Quantities like '0.16 ps/mm' or '3.2e-28 s^2/cm' in SI numerator per meter."""
    parts = text.split()
    if len(parts) != 2 or "/" not in parts[1]:
        raise ValueError(f"expected 'value unit/unit', got {text!r}")
    value = float(parts[0])
    top, _, bottom = parts[1].partition("/")
    top = top.replace("^2", "2")
    if power == 2:
        if not top.endswith("2"):
            raise ValueError(f"expected a squared time unit, got {parts[1]!r}")
        top = top[:-1]
    if top not in numer or bottom not in denom:
        raise ValueError(f"unit {parts[1]!r} invalid here")
    return value * numer[top] ** power / denom[bottom]


def _parse_time(text: str) -> float:
    return _parse_quantity(text, _TIME_UNITS)


def _parse_time_list(text: str) -> tuple[float, ...]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    return tuple(_parse_time(item) for item in items)


def _parse_angle(text: str) -> float:
    return _parse_quantity(text, _ANGLE_UNITS)


def _parse_length_m(text: str) -> float:
    return _parse_quantity(text, _LENGTH_UNITS_M)


def _parse_plain_float(text: str) -> float:
    if len(text.split()) != 1:
        raise ValueError(f"dimensionless value expected, got {text!r}")
    return float(text)


def _parse_int(text: str) -> int:
    if len(text.split()) != 1:
        raise ValueError(f"integer expected, got {text!r}")
    value = float(text)
    if value != int(value):
        raise ValueError(f"integer expected, got {text!r}")
    return int(value)


def _parse_mode(text: str) -> str:
    if text not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    return text


_PARSERS = {
    "source.crystal_length": lambda s: _parse_length_m(s) * 1e3,  # -> mm
    "source.gv_mismatch": lambda s: _parse_ratio_quantity(s, _TIME_UNITS, _PER_LENGTH_M) * 1e-3,
    "source.degenerate_wavelength": lambda s: _parse_length_m(s) * 1e9,  # -> nm
    "fiber.length": lambda s: _parse_length_m(s) * 1e2,  # -> cm
    "fiber.gvd": lambda s: _parse_ratio_quantity(s, _TIME_UNITS, _PER_LENGTH_M, power=2) * 1e-2,
    "fiber.group_delay": lambda s: _parse_ratio_quantity(s, _TIME_UNITS, _PER_LENGTH_M) * 1e-2,
    "plates.delays": _parse_time_list,
    "plates.kappa": _parse_plain_float,
    "analyzers.theta1": _parse_angle,
    "analyzers.theta2": _parse_angle,
    "analyzers.mode": _parse_mode,
    "chain.jitter_fwhm": _parse_time,
    "chain.channel_width": _parse_time,
    "chain.n_channels": _parse_int,
    "chain.window_center": _parse_time,
    "chain.accidentals_per_channel": _parse_plain_float,
    "chain.pairs": _parse_int,
    "run.drift_visibility": _parse_plain_float,
    "run.seed": _parse_int,
    "grid.n_samples": _parse_int,
    "grid.lobes": _parse_plain_float,
}
_BARE_KEYS = {"drift_visibility": "run.drift_visibility", "seed": "run.seed"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated aggregate of every knob of a simulated experiment."""

    source: SpdcSource
    fiber: FiberChannel
    plate_delays_s: tuple[float, ...] = ()
    kappa: float | None = None
    analyzers: AnalyzerSettings | None = AnalyzerSettings(math.pi / 4, math.pi / 4)
    chain: DetectionChain = DetectionChain()
    drift_visibility: float = 1.0
    seed: int = 12345
    grid_n_samples: int = 2**14
    grid_lobes: float = 20.0

    def __post_init__(self) -> None:
        if self.kappa is not None and self.plate_delays_s:
            raise ValueError("kappa and explicit plate delays are mutually exclusive")
        if not 0.0 <= self.drift_visibility <= 1.0:
            raise ValueError("drift_visibility must lie in [0, 1]")

    def delay_state(self) -> DelayState:
        if self.kappa is not None:
            return delay_state_from_kappa(self.source, self.kappa)
        plates = tuple(BirefringentPlate(delay_s=d) for d in self.plate_delays_s)
        return effective_delay(self.source, plates)


def default_config() -> ExperimentConfig:
    """The 240 m preset: every documented default."""
    return ExperimentConfig(
        source=SpdcSource(crystal_length_mm=0.5, gv_mismatch_s_per_mm=0.16e-12),
        fiber=FiberChannel(length_cm=2.4e4, gvd_s2_per_cm=3.2e-28),
        chain=DetectionChain(
            jitter_fwhm_s=750e-12,
            channel_width_s=61.4e-12,
            n_channels=512,
            window_center_s=0.0,
            accidentals_per_channel=20.0,
            pairs=1_000_000,
        ),
    )


def preset_1km() -> ExperimentConfig:
    cfg = default_config()
    return replace(cfg, fiber=replace(cfg.fiber, length_cm=1.0e5))


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config text, reporting every error at once."""
    errors: list[tuple[int, str]] = []
    values: dict[str, object] = {}
    lines_by_key: dict[str, int] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            errors.append((lineno, f"expected 'key = value', got {line!r}"))
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if "." not in key:
            if key in _BARE_KEYS:
                key = _BARE_KEYS[key]
            elif section:
                key = f"{section}.{key}"
        if key not in _PARSERS:
            errors.append((lineno, f"unknown key {key!r}"))
            continue
        if key in values:
            errors.append((lineno, f"duplicate key {key!r}"))
            continue
        try:
            values[key] = _PARSERS[key](value)
            lines_by_key[key] = lineno
        except ValueError as exc:
            errors.append((lineno, f"{key}: {exc}"))

    if "plates.kappa" in values and "plates.delays" in values:
        errors.append(
            (lines_by_key["plates.kappa"], "plates.kappa conflicts with plates.delays")
        )

    def build(factory, keys: tuple[str, ...]):
        try:
            return factory()
        except (ValueError, TypeError) as exc:
            line = min((lines_by_key[k] for k in keys if k in lines_by_key), default=0)
            errors.append((line, str(exc)))
            return None

    base = default_config()

    def make_source():
        kwargs = {}
        if "source.degenerate_wavelength" in values:
            kwargs["degenerate_frequency_rad_s"] = degenerate_angular_frequency(
                values["source.degenerate_wavelength"]
            )
        return SpdcSource(
            crystal_length_mm=values.get(
                "source.crystal_length", base.source.crystal_length_mm
            ),
            gv_mismatch_s_per_mm=values.get(
                "source.gv_mismatch", base.source.gv_mismatch_s_per_mm
            ),
            **kwargs,
        )

    def make_fiber():
        return FiberChannel(
            length_cm=values.get("fiber.length", base.fiber.length_cm),
            gvd_s2_per_cm=values.get("fiber.gvd", base.fiber.gvd_s2_per_cm),
            group_delay_s_per_cm=values.get(
                "fiber.group_delay", base.fiber.group_delay_s_per_cm
            ),
        )

    def make_analyzers():
        mode = values.get("analyzers.mode", MODE_TWO_POLARIZERS)
        if mode == MODE_NONE:
            return None
        return AnalyzerSettings(
            theta1=values.get("analyzers.theta1", math.pi / 4),
            theta2=values.get("analyzers.theta2", math.pi / 4),
            mode=mode,
        )

    def make_chain():
        return DetectionChain(
            jitter_fwhm_s=values.get("chain.jitter_fwhm", base.chain.jitter_fwhm_s),
            channel_width_s=values.get("chain.channel_width", base.chain.channel_width_s),
            n_channels=values.get("chain.n_channels", base.chain.n_channels),
            window_center_s=values.get("chain.window_center", base.chain.window_center_s),
            accidentals_per_channel=values.get(
                "chain.accidentals_per_channel", base.chain.accidentals_per_channel
            ),
            pairs=values.get("chain.pairs", base.chain.pairs),
        )

    source = build(make_source, ("source.crystal_length", "source.gv_mismatch"))
    fiber = build(make_fiber, ("fiber.length", "fiber.gvd", "fiber.group_delay"))
    analyzers_ok = build(make_analyzers, ("analyzers.theta1", "analyzers.theta2", "analyzers.mode"))
    analyzers_given = "analyzers.mode" in values or analyzers_ok is not None
    chain = build(
        make_chain,
        (
            "chain.jitter_fwhm",
            "chain.channel_width",
            "chain.n_channels",
            "chain.window_center",
            "chain.accidentals_per_channel",
            "chain.pairs",
        ),
    )

    grid_n = values.get("grid.n_samples", base.grid_n_samples)
    if isinstance(grid_n, int) and (grid_n < 2 or grid_n & (grid_n - 1)):
        errors.append((lines_by_key.get("grid.n_samples", 0), "grid.n_samples must be a power of two"))

    cfg = None
    if not errors and source is not None and fiber is not None and chain is not None:
        def make_config():
            return ExperimentConfig(
                source=source,
                fiber=fiber,
                plate_delays_s=tuple(values.get("plates.delays", ())),
                kappa=values.get("plates.kappa"),
                analyzers=analyzers_ok if analyzers_given else base.analyzers,
                chain=chain,
                drift_visibility=values.get("run.drift_visibility", base.drift_visibility),
                seed=values.get("run.seed", base.seed),
                grid_n_samples=grid_n,
                grid_lobes=values.get("grid.lobes", base.grid_lobes),
            )

        cfg = build(make_config, tuple(values))
    if errors:
        raise ConfigError(sorted(errors))
    assert cfg is not None
    return cfg


def format_config(cfg: ExperimentConfig) -> str:
    """Emit a config in canonical units; ``parse_config`` round-trips it."""
    lines = [
        "[source]",
        f"crystal_length = {cfg.source.crystal_length_mm!r} mm",
        f"gv_mismatch = {cfg.source.gv_mismatch_s_per_mm!r} s/mm",
        "",
        "[fiber]",
        f"length = {cfg.fiber.length_cm!r} cm",
        f"gvd = {cfg.fiber.gvd_s2_per_cm!r} s^2/cm",
        f"group_delay = {cfg.fiber.group_delay_s_per_cm!r} s/cm",
        "",
        "[plates]",
    ]
    if cfg.kappa is not None:
        lines.append(f"kappa = {cfg.kappa!r}")
    if cfg.plate_delays_s:
        lines.append("delays = " + ", ".join(f"{d!r} s" for d in cfg.plate_delays_s))
    lines += ["", "[analyzers]"]
    if cfg.analyzers is None:
        lines.append(f"mode = {MODE_NONE}")
    else:
        lines += [
            f"theta1 = {cfg.analyzers.theta1!r} rad",
            f"theta2 = {cfg.analyzers.theta2!r} rad",
            f"mode = {cfg.analyzers.mode}",
        ]
    lines += [
        "",
        "[chain]",
        f"jitter_fwhm = {cfg.chain.jitter_fwhm_s!r} s",
        f"channel_width = {cfg.chain.channel_width_s!r} s",
        f"n_channels = {cfg.chain.n_channels}",
        f"window_center = {cfg.chain.window_center_s!r} s",
        f"accidentals_per_channel = {cfg.chain.accidentals_per_channel!r}",
        f"pairs = {cfg.chain.pairs}",
        "",
        "[run]",
        f"drift_visibility = {cfg.drift_visibility!r}",
        f"seed = {cfg.seed}",
        "",
        "[grid]",
        f"n_samples = {cfg.grid_n_samples}",
        f"lobes = {cfg.grid_lobes!r}",
    ]
    return "\n".join(lines) + "\n"


# --- figure presets ----------------------------------------------------------
#
# Each entry reproduces one published-figure configuration end to end.  The
# drift visibility shipped with a preset is the value documented to match
# the measured interference contrast of that data set (1.0 where the setup
# suppressed drift, e.g. with the single analyzer placed before the fiber);
# pass a modified config to explore the ideal case.

_PLATE = QUARTZ_DELAY_PER_MM_S


def _fig_base(length_cm: float, theta1_deg: float, theta2_deg: float | None,
              drift: float, plates: tuple[float, ...] = (),
              mode: str = MODE_TWO_POLARIZERS) -> ExperimentConfig:
    cfg = default_config()
    fiber = replace(cfg.fiber, length_cm=length_cm)
    if theta2_deg is None:
        analyzers = None
    else:
        analyzers = AnalyzerSettings(
            math.radians(theta1_deg), math.radians(theta2_deg), mode=mode
        )
    return replace(
        cfg,
        fiber=fiber,
        analyzers=analyzers,
        plate_delays_s=plates,
        drift_visibility=drift,
        chain=replace(cfg.chain, pairs=200_000),
    )


FIGURE_PRESETS: dict[str, tuple[str, ExperimentConfig]] = {
    # spread, no polarization selection
    "fig3a": ("240 m fiber, unpolarized spread peak", _fig_base(2.4e4, 0, None, 1.0)),
    "fig3b": ("1 km fiber, unpolarized spread peak", _fig_base(1.0e5, 0, None, 1.0)),
    # 240 m, both analyzer settings; measured contrast ~35% (drift ~0.88 here)
    "fig4a": ("240 m, analyzers +45/+45", _fig_base(2.4e4, 45, 45, 0.88)),
    "fig4b": ("240 m, analyzers -45/+45", _fig_base(2.4e4, -45, 45, 0.88)),
    # 1 km, both analyzer settings; fringe contrast 78%
    "fig5a": ("1 km, analyzers +45/+45", _fig_base(1.0e5, 45, 45, 0.78)),
    "fig5b": ("1 km, analyzers -45/+45", _fig_base(1.0e5, -45, 45, 0.78)),
    # 1 km fringe scan in a 0.43 ns center window
    "fig6": ("1 km, windowed fringe scan vs theta1", _fig_base(1.0e5, 45, 45, 0.78)),
    # one 1 mm quartz plate, axis parallel (reduces delay, kappa = 0.25)
    "fig7a": ("1 km, parallel plate, +45/+45", _fig_base(1.0e5, 45, 45, 0.78, (-_PLATE,))),
    "fig7b": ("1 km, parallel plate, -45/+45", _fig_base(1.0e5, -45, 45, 0.78, (-_PLATE,))),
    # one 1 mm quartz plate, axis orthogonal (increases delay, kappa = 1.75)
    "fig7c": ("1 km, orthogonal plate, +45/+45", _fig_base(1.0e5, 45, 45, 0.78, (_PLATE,))),
    "fig7d": ("1 km, orthogonal plate, -45/+45", _fig_base(1.0e5, -45, 45, 0.78, (_PLATE,))),
    # single analyzer before the fiber: drift eliminated, only the +45 pairing
    "fig8a": (
        "1 km, single pre-fiber analyzer, no plates",
        _fig_base(1.0e5, 45, 45, 1.0, (), MODE_SINGLE_POLARIZER),
    ),
    "fig8b": (
        "1 km, single pre-fiber analyzer, one orthogonal plate",
        _fig_base(1.0e5, 45, 45, 1.0, (_PLATE,), MODE_SINGLE_POLARIZER),
    ),
    "fig8c": (
        "1 km, single pre-fiber analyzer, two orthogonal plates",
        _fig_base(1.0e5, 45, 45, 1.0, (_PLATE, _PLATE), MODE_SINGLE_POLARIZER),
    ),
}
