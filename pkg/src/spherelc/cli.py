"""Command-line front end: theory / simulate / spectrum / compare.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, apply_overrides, parse_config
from .curves import learning_curve
from .harmonics import harmonic_dim, sample_sphere
from .rmt import MarchenkoPastur, mp_pdf
from .sim import empirical_mse, empirical_spectrum
from .svgplot import svg_histogram, svg_line_plot

__all__ = ["main"]


def _fmt(x: float) -> str:
    """17 significant digits: lossless double round-trip."""
    return format(float(x), ".17g")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: Path, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _out_dir(cfg: ExperimentConfig) -> Path:
    if cfg.out_dir is None:
        raise ConfigError("no output directory: set [output].directory or pass --out")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg.out_dir


def _load_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config)
    return apply_overrides(
        cfg,
        out=args.out,
        seed=args.seed,
        trials=getattr(args, "trials", None),
        formats=args.format,
        budget_seconds=getattr(args, "budget_seconds", None),
        workers=getattr(args, "workers", None),
        degree=getattr(args, "degree", None),
        spectrum_m=getattr(args, "m", None),
    )


def cmd_theory(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    curve = learning_curve(cfg.profile, cfg.geometry, cfg.m_grid)
    lines = ["m,bias,variance,total"]
    for m, b, v, t in curve.points:
        lines.append(f"{m},{_fmt(b)},{_fmt(v)},{_fmt(t)}")
    _write_text(out / "theory.csv", "\n".join(lines) + "\n")
    if "json" in cfg.formats:
        _write_json(out / "theory.json", {
            "m": [int(v) for v in curve.m],
            "bias": list(map(float, curve.bias)),
            "variance": list(map(float, curve.variance)),
            "total": list(map(float, curve.total)),
        })
    if "svg" in cfg.formats:
        svg = svg_line_plot(
            [
                {"x": curve.m, "y": curve.total, "label": "total"},
                {"x": curve.m, "y": curve.bias, "label": "bias"},
                {"x": curve.m, "y": curve.variance, "label": "variance"},
            ],
            title="analytic learning curve", xlabel="m", ylabel="test error",
        )
        _write_text(out / "theory.svg", svg)
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    start = time.monotonic()
    rows = []
    failures = 0
    for m in cfg.m_grid:
        if cfg.budget_seconds is not None and time.monotonic() - start > cfg.budget_seconds:
            raise ConfigError(
                f"budget of {cfg.budget_seconds}s exhausted before m={m}; "
                "shrink the grid or raise --budget-seconds"
            )
        try:
            res = empirical_mse(cfg.profile, cfg.geometry, m, cfg.trials,
                                cfg.test_points, cfg.seed, workers=cfg.workers)
            rows.append((m, res.mean, res.std, res.trials, res.jitter_used, res))
        except ArithmeticError as exc:
            print(f"m={m}: numerical failure: {exc}", file=sys.stderr)
            rows.append((m, math.nan, math.nan, cfg.trials, math.nan, None))
            failures += 1
    lines = ["m,mse_mean,mse_std,trials,jitter_used"]
    for m, mean, std, trials, jitter, _ in rows:
        lines.append(f"{m},{_fmt(mean)},{_fmt(std)},{trials},{_fmt(jitter)}")
    _write_text(out / "empirical.csv", "\n".join(lines) + "\n")
    if "json" in cfg.formats:
        payload = []
        for m, mean, std, trials, jitter, res in rows:
            q25, q75 = res.quantiles() if res is not None else (math.nan, math.nan)
            payload.append({
                "m": int(m), "mse_mean": mean, "mse_std": std, "trials": trials,
                "jitter_used": jitter, "mse_q25": q25, "mse_q75": q75,
            })
        _write_json(out / "empirical.json", {"rows": payload, "seed": cfg.seed})
    if "svg" in cfg.formats:
        ms = np.array([r[0] for r in rows], dtype=float)
        means = np.array([r[1] for r in rows])
        stds = np.array([r[2] for r in rows])
        svg = svg_line_plot(
            [{"x": ms, "y": means, "yerr": stds, "label": "empirical MSE", "marker": True}],
            title="kernel regression test error", xlabel="m", ylabel="MSE",
        )
        _write_text(out / "empirical.svg", svg)
    return 3 if failures == len(rows) else 0


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    if cfg.degree is None:
        raise ConfigError("spectrum needs a degree: set [spectrum].degree or pass --degree")
    if cfg.degree > cfg.profile.k_max:
        raise ConfigError("--degree exceeds the kernel's top degree")
    m = cfg.spectrum_m
    if m is None:
        raise ConfigError("spectrum needs a sample count: set [spectrum].m or pass --m")
    data = sample_sphere(cfg.geometry, m, cfg.seed)
    res = empirical_spectrum(data, cfg.degree)
    _write_text(out / "spectrum.csv",
                "\n".join(_fmt(v) for v in res.eigenvalues) + "\n")
    _write_json(out / "spectrum.json", {
        "alpha_used": res.ratio,
        "ks": res.ks,
        "m": int(m),
        "N_r": harmonic_dim(cfg.geometry, cfg.degree),
    })
    if "svg" in cfg.formats:
        law = MarchenkoPastur(res.ratio)
        xs = np.linspace(law.alpha_minus, law.alpha_plus, 400)
        svg = svg_histogram(
            res.eigenvalues, overlay=(xs, mp_pdf(law, xs)),
            atom=law.point_mass or None,
            title=f"degree-{cfg.degree} spectrum vs MP({res.ratio:.3g})",
        )
        _write_text(out / "spectrum.svg", svg)
    return 0


def _read_csv_columns(path: Path) -> dict[str, list[float]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}") from None
    if not lines:
        raise ConfigError(f"empty CSV: {path}")
    header = lines[0].split(",")
    cols: dict[str, list[float]] = {h: [] for h in header}
    for line in lines[1:]:
        for h, cell in zip(header, line.split(",")):
            cols[h].append(float(cell))
    return cols


def cmd_compare(args) -> int:
    theory = _read_csv_columns(Path(args.theory))
    empirical = _read_csv_columns(Path(args.empirical))
    for name, cols in (("theory", theory), ("empirical", empirical)):
        if "m" not in cols:
            raise ConfigError(f"{name} CSV has no 'm' column")
    if theory["m"] != empirical["m"]:
        raise ConfigError("the two CSV files disagree on the m grid")
    floor = args.floor
    points = []
    rel_devs = []
    for m, t, e in zip(theory["m"], theory["total"], empirical["mse_mean"]):
        relative = t > floor
        dev = abs(e - t) / t if relative else abs(e - t)
        if relative and math.isfinite(dev):
            rel_devs.append(dev)
        points.append({"m": int(m), "theory": t, "empirical": e,
                       "deviation": dev, "relative": relative})
    median = float(np.median(rel_devs)) if rel_devs else math.nan
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "compare.json", {
        "points": points,
        "median_relative_deviation": median,
        "floor": floor,
    })
    if args.format and "svg" in args.format:
        ms = np.array([p["m"] for p in points], dtype=float)
        svg = svg_line_plot(
            [
                {"x": ms, "y": np.array([p["theory"] for p in points]), "label": "theory"},
                {"x": ms, "y": np.array([p["empirical"] for p in points]),
                 "yerr": np.array(empirical.get("mse_std", [0.0] * len(points))),
                 "label": "empirical", "marker": True},
            ],
            title="theory vs simulation", xlabel="m", ylabel="test error",
        )
        _write_text(out / "compare.svg", svg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spherelc",
        description="Learning curves for dot-product kernel regression on spheres",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override run seed")
        p.add_argument("--format", help="comma list from csv,json,svg")

    p = sub.add_parser("theory", help="write the analytic learning curve")
    common(p)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="run Monte Carlo kernel regression")
    common(p)
    p.add_argument("--trials", type=int, help="override trial count")
    p.add_argument("--workers", type=int, help="concurrent trials")
    p.add_argument("--budget-seconds", type=float, dest="budget_seconds",
                   help="abort when the wall clock exceeds this budget")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="empirical Gram spectrum vs the MP law")
    common(p)
    p.add_argument("--degree", type=int, help="harmonic degree r")
    p.add_argument("--m", type=int, help="sample count")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("compare", help="score an empirical curve against theory")
    p.add_argument("--theory", required=True, help="theory.csv path")
    p.add_argument("--empirical", required=True, help="empirical.csv path")
    p.add_argument("--out", help="output directory (default: cwd)")
    p.add_argument("--format", help="comma list from csv,json,svg")
    p.add_argument("--floor", type=float, default=1e-12,
                   help="theory values at or below this are compared absolutely")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
