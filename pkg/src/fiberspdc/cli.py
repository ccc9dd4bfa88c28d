"""Command-line entry point: simulate, fit, scan, bell, figures.

Every subcommand is driven by a config file (see :mod:`fiberspdc.config`);
an absent or empty config means the documented 240 m defaults.  All outputs
are plain CSV or key=value text, deterministic for a fixed config and seed.
Failures exit nonzero with a single machine-readable ``error: ...`` line on
stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, detection, kernel
from .config import (
    FIGURE_PRESETS,
    ConfigError,
    ExperimentConfig,
    _parse_angle,
    _parse_time,
    default_config,
    format_config,
    parse_config,
)
from .dispersion import g2_analyzer_analytic, g2_unpolarized


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return default_config()
    return parse_config(Path(path).read_text(encoding="utf-8"))


def correlation_model(cfg: ExperimentConfig):
    """Pre-response correlation shape selected by the config."""
    delay = cfg.delay_state()
    if cfg.analyzers is None:
        return lambda t: g2_unpolarized(cfg.source, cfg.fiber, t, delay=delay)
    return lambda t: g2_analyzer_analytic(
        cfg.source,
        cfg.fiber,
        cfg.analyzers,
        t,
        delay=delay,
        drift_visibility=cfg.drift_visibility,
    )


def config_metadata(cfg: ExperimentConfig) -> dict:
    delay = cfg.delay_state()
    md = {
        "crystal_length_mm": cfg.source.crystal_length_mm,
        "gv_mismatch_s_per_mm": cfg.source.gv_mismatch_s_per_mm,
        "fiber_length_cm": cfg.fiber.length_cm,
        "fiber_gvd_s2_per_cm": cfg.fiber.gvd_s2_per_cm,
        "fiber_group_delay_s_per_cm": cfg.fiber.group_delay_s_per_cm,
        "kappa": delay.kappa,
        "drift_visibility": cfg.drift_visibility,
    }
    if cfg.analyzers is None:
        md["mode"] = "none"
    else:
        md["mode"] = cfg.analyzers.mode
        md["theta1_rad"] = cfg.analyzers.theta1
        md["theta2_rad"] = cfg.analyzers.theta2
    return md


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    hist = detection.simulate_histogram(
        correlation_model(cfg), cfg.chain, seed, metadata=config_metadata(cfg)
    )
    detection.write_histogram(hist, args.out)
    print(f"wrote {args.out} ({hist.total_counts()} counts)")
    return 0


def _infer_sign(hist: detection.CoincidenceHistogram) -> int:
    t1 = hist.metadata.get("theta1_rad")
    t2 = hist.metadata.get("theta2_rad")
    if t1 is None or t2 is None:
        return +1
    return +1 if abs(math.sin(t1 + t2)) >= abs(math.sin(t1 - t2)) else -1


def _cmd_fit(args) -> int:
    hist = detection.read_histogram(args.infile)
    sign = {"+": +1, "-": -1, None: _infer_sign(hist)}[args.sign]
    fit = analysis.fit_spread_peak(hist, family=args.model, sign=sign)
    Path(args.out).write_text(analysis.format_fit_report(fit), encoding="utf-8")
    residuals_path = args.residuals or (str(args.out) + ".residuals.csv")
    model = analysis.evaluate_fit_model(hist, fit, family=args.model, sign=sign)
    lines = ["channel,data,model,residual"]
    for i, (d, m) in enumerate(zip(hist.counts, model)):
        lines.append(f"{i},{int(d)},{m:.6f},{int(d) - m:.6f}")
    Path(residuals_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(
        f"fit: gvd={fit.gvd_s2_per_cm:.4e} s^2/cm  chi2/dof={fit.chi2_per_dof:.3f}"
        f"  -> {args.out}"
    )
    return 0


def _cmd_scan(args) -> int:
    cfg = _load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    theta2 = _parse_angle(args.theta2)
    width = _parse_time(args.window)
    center = _parse_time(args.window_center)
    thetas = np.radians(np.linspace(args.start, args.stop, args.points))
    scan = analysis.fringe_scan(
        cfg.source,
        cfg.fiber,
        cfg.chain,
        thetas,
        theta2=theta2,
        window_center_s=center,
        window_width_s=width,
        counts_per_setting=args.pairs,
        delay=cfg.delay_state(),
        drift_visibility=cfg.drift_visibility,
        seed=seed if args.monte_carlo else None,
    )
    lines = [
        f"# theta2_rad={theta2!r}",
        f"# window_center_s={center!r}",
        f"# window_width_s={width!r}",
        f"# pairs_per_setting={args.pairs!r}",
        f"# seed={seed}",
        "theta1_deg,counts",
    ]
    for theta1, counts in scan:
        lines.append(f"{math.degrees(theta1):.4f},{counts:.6f}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    vis = analysis.scan_visibility(scan)
    print(f"wrote {args.out} (visibility {vis:.3f})")
    return 0


def _cmd_bell(args) -> int:
    cfg = _load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    theta = _parse_angle(args.theta)
    width = _parse_time(args.window)
    result = analysis.bell_measurement(
        cfg.source,
        cfg.fiber,
        cfg.chain,
        theta,
        window_width_s=width,
        pairs=args.pairs,
        delay=cfg.delay_state(),
        drift_visibility=cfg.drift_visibility,
        seed=seed if args.monte_carlo else None,
    )
    Path(args.out).write_text(analysis.format_bell_report(result), encoding="utf-8")
    print(f"R = {result.r_value:.4f} +- {result.sigma_r:.4f} -> {args.out}")
    return 0


def _cmd_figures(args) -> int:
    if args.figure_id not in FIGURE_PRESETS:
        raise ValueError(
            f"unknown figure id {args.figure_id!r}; available: {', '.join(FIGURE_PRESETS)}"
        )
    description, cfg = FIGURE_PRESETS[args.figure_id]
    seed = cfg.seed if args.seed is None else args.seed
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    Path(outdir / f"{args.figure_id}_config.txt").write_text(
        f"# {description}\n" + format_config(cfg), encoding="utf-8"
    )
    if args.figure_id == "fig6":
        return _figure_scan(args.figure_id, cfg, seed, outdir)
    return _figure_histogram(args.figure_id, cfg, seed, outdir)


def _figure_histogram(figure_id: str, cfg: ExperimentConfig, seed: int, outdir: Path) -> int:
    model = correlation_model(cfg)
    hist = detection.simulate_histogram(
        model, cfg.chain, seed, metadata=config_metadata(cfg)
    )
    data_path = outdir / f"{figure_id}_histogram.csv"
    detection.write_histogram(hist, data_path)
    expected = detection.expected_channel_counts(model, cfg.chain)
    model_path = outdir / f"{figure_id}_model.csv"
    lines = ["channel,time_ns,expected_counts"]
    for i, (t, m) in enumerate(zip(hist.channel_centers_s, expected)):
        lines.append(f"{i},{t * 1e9:.6f},{m:.6f}")
    model_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {data_path} and {model_path}")
    return 0


def _figure_scan(figure_id: str, cfg: ExperimentConfig, seed: int, outdir: Path) -> int:
    thetas = np.radians(np.linspace(-90.0, 90.0, 37))
    common = dict(
        theta2=math.pi / 4,
        window_center_s=0.0,
        window_width_s=0.43e-9,
        counts_per_setting=2e4,
        delay=cfg.delay_state(),
        drift_visibility=cfg.drift_visibility,
    )
    sampled = analysis.fringe_scan(
        cfg.source, cfg.fiber, cfg.chain, thetas, seed=seed, **common
    )
    expected = analysis.fringe_scan(cfg.source, cfg.fiber, cfg.chain, thetas, **common)
    data_path = outdir / f"{figure_id}_scan.csv"
    model_path = outdir / f"{figure_id}_model.csv"
    data_path.write_text(
        "theta1_deg,counts\n"
        + "\n".join(f"{math.degrees(t):.4f},{c:.6f}" for t, c in sampled)
        + "\n",
        encoding="utf-8",
    )
    model_path.write_text(
        "theta1_deg,expected_counts\n"
        + "\n".join(f"{math.degrees(t):.4f},{c:.6f}" for t, c in expected)
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {data_path} and {model_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiberspdc",
        description=(
            "Simulate and analyze coincidence histograms of fiber-spread "
            "polarization-entangled photon pairs"
            f" (Monte Carlo kernel: {kernel.BACKEND})"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a coincidence histogram CSV")
    p.add_argument("--config", help="config file (defaults: 240 m preset)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit a spread-peak model to a histogram CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", choices=analysis.FIT_FAMILIES, default="plain")
    p.add_argument("--sign", choices=["+", "-"])
    p.add_argument("--out", required=True)
    p.add_argument("--residuals", help="residuals CSV (default: <out>.residuals.csv)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("scan", help="windowed fringe scan versus analyzer angle")
    p.add_argument("--config")
    p.add_argument("--theta2", default="45 deg")
    p.add_argument("--window", default="0.43 ns")
    p.add_argument("--window-center", default="0 s")
    p.add_argument("--start", type=float, default=-90.0, help="first theta1 (deg)")
    p.add_argument("--stop", type=float, default=90.0, help="last theta1 (deg)")
    p.add_argument("--points", type=int, default=37)
    p.add_argument("--pairs", type=float, default=2e4, help="incident pairs per setting")
    p.add_argument("--monte-carlo", action="store_true", help="sample counts instead of expectations")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("bell", help="three-setting windowed R statistic")
    p.add_argument("--config")
    p.add_argument("--theta", default="30 deg")
    p.add_argument("--window", default="0.43 ns")
    p.add_argument("--pairs", type=float, default=1e4)
    p.add_argument("--monte-carlo", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bell)

    p = sub.add_parser("figures", help="reproduce a published-figure preset")
    p.add_argument("figure_id", metavar="ID", help=", ".join(FIGURE_PRESETS))
    p.add_argument("--outdir", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_figures)
    return parser


def run_subcommand(argv: list[str]) -> int:
    """Parse arguments and execute one subcommand; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for line, message in exc.errors:
            print(f"error: config line {line}: {message}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single CLI error surface
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_subcommand(sys.argv[1:]))


if __name__ == "__main__":
    main()
