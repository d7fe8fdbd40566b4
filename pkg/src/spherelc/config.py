"""Experiment configuration: TOML parsing, validation, and CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .curves import SpectralProfile
from .harmonics import Geometry

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "M_CEILING"]

# largest training-set size the desk-scale solver budget allows
M_CEILING = 25_000

FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: Geometry
    profile: SpectralProfile
    m_grid: tuple[int, ...]
    trials: int
    test_points: int
    seed: int
    out_dir: Path | None
    formats: tuple[str, ...]
    workers: int = 1
    budget_seconds: float | None = None
    # spectrum command extras
    degree: int | None = None
    spectrum_m: int | None = None


def _section(raw: dict, name: str) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(sec)


def _take(sec: dict, section: str, key: str, default=None):
    return sec.pop(key, default)


def _require(sec: dict, section: str, key: str):
    if key not in sec:
        raise ConfigError(f"[{section}] is missing required key {key!r}")
    return sec.pop(key)


def _no_leftovers(sec: dict, section: str) -> None:
    if sec:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(sec)}")


def _int_in(value, name: str, minimum: int) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer") from None
    if out < minimum:
        raise ConfigError(f"{name} must be >= {minimum}")
    return out


def _parse_geometry(raw: dict) -> Geometry:
    sec = _section(raw, "geometry")
    kind = _require(sec, "geometry", "kind")
    try:
        if kind == "full":
            geom = Geometry.full(_int_in(_require(sec, "geometry", "d"), "geometry.d", 2))
        elif kind == "patched":
            geom = Geometry.patched(
                _int_in(_require(sec, "geometry", "d0"), "geometry.d0", 2),
                _int_in(_require(sec, "geometry", "p"), "geometry.p", 1),
            )
        else:
            raise ConfigError(f"geometry.kind must be 'full' or 'patched', got {kind!r}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _no_leftovers(sec, "geometry")
    return geom


def _parse_profile(raw: dict) -> SpectralProfile:
    kernel = _section(raw, "kernel")
    target = _section(raw, "target")

    gap = _take(kernel, "kernel", "gap")
    h2 = _take(kernel, "kernel", "h2")
    if (gap is None) == (h2 is None):
        raise ConfigError("[kernel] needs exactly one of 'gap' or 'h2'")
    lam = float(_take(kernel, "kernel", "lambda", 0.0))
    k_max = _take(kernel, "kernel", "k_max")

    if h2 is not None:
        h2 = tuple(float(v) for v in h2)
        if k_max is not None and int(k_max) != len(h2):
            raise ConfigError("kernel.k_max disagrees with the length of kernel.h2")
        k_max = len(h2)
    else:
        k_max = _int_in(k_max if k_max is not None else 7, "kernel.k_max", 1)
        h2 = tuple(float(gap) ** -(k - 1) for k in range(1, k_max + 1))
    _no_leftovers(kernel, "kernel")

    f2 = _take(target, "target", "f2")
    exponent = _take(target, "target", "exponent")
    if (f2 is None) == (exponent is None):
        raise ConfigError("[target] needs exactly one of 'f2' or 'exponent'")
    if f2 is not None:
        f2 = tuple(float(v) for v in f2)
        if len(f2) != k_max:
            raise ConfigError("target.f2 must list one power per kernel degree")
    else:
        f2 = tuple(float(k) ** -float(exponent) for k in range(1, k_max + 1))
    noise = float(_take(target, "target", "noise", 0.0))
    _no_leftovers(target, "target")

    try:
        return SpectralProfile(h2=h2, f2=f2, lam=lam, noise=noise)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _parse_m_grid(sec: dict) -> tuple[int, ...]:
    explicit = _take(sec, "run", "m_grid")
    m_min = _take(sec, "run", "m_min")
    m_max = _take(sec, "run", "m_max")
    m_count = _take(sec, "run", "m_count")
    has_span = any(v is not None for v in (m_min, m_max, m_count))
    if (explicit is None) == (not has_span):
        raise ConfigError("[run] needs either 'm_grid' or 'm_min'/'m_max'/'m_count'")
    if explicit is not None:
        grid = tuple(_int_in(v, "run.m_grid entry", 1) for v in explicit)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("run.m_grid must be strictly increasing")
    else:
        if None in (m_min, m_max, m_count):
            raise ConfigError("log-spaced grids need all of m_min, m_max, m_count")
        lo = _int_in(m_min, "run.m_min", 1)
        hi = _int_in(m_max, "run.m_max", lo)
        n = _int_in(m_count, "run.m_count", 1)
        grid = tuple(int(v) for v in
                     np.unique(np.rint(np.geomspace(lo, hi, n)).astype(np.int64)))
    if len(grid) == 0:
        raise ConfigError("m_grid is empty")
    if grid[-1] > M_CEILING:
        raise ConfigError(
            f"m = {grid[-1]} exceeds the desk-scale ceiling of {M_CEILING}"
        )
    return grid


def parse_config(path: str | Path) -> ExperimentConfig:
    """Read a TOML experiment file into a validated ExperimentConfig."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from None

    geometry = _parse_geometry(raw)
    profile = _parse_profile(raw)

    run = _section(raw, "run")
    m_grid = _parse_m_grid(run)
    trials = _int_in(_take(run, "run", "trials", 20), "run.trials", 1)
    test_points = _int_in(_take(run, "run", "test_points", 2000), "run.test_points", 1)
    seed = _int_in(_take(run, "run", "seed", 0), "run.seed", 0)
    workers = _int_in(_take(run, "run", "workers", 1), "run.workers", 1)
    budget = _take(run, "run", "budget_seconds")
    budget_seconds = None if budget is None else float(budget)
    _no_leftovers(run, "run")

    output = _section(raw, "output")
    directory = _take(output, "output", "directory")
    out_dir = None if directory is None else Path(directory)
    formats = tuple(_take(output, "output", "formats", ["csv"]))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"unknown output formats {bad}; choose from {list(FORMATS)}")
    _no_leftovers(output, "output")

    spectrum = _section(raw, "spectrum")
    degree = _take(spectrum, "spectrum", "degree")
    if degree is not None:
        degree = _int_in(degree, "spectrum.degree", 1)
        if degree > profile.k_max:
            raise ConfigError("spectrum.degree exceeds the kernel's top degree")
    spectrum_m = _take(spectrum, "spectrum", "m")
    if spectrum_m is not None:
        spectrum_m = _int_in(spectrum_m, "spectrum.m", 2)
        if spectrum_m > M_CEILING:
            raise ConfigError(f"spectrum.m exceeds the desk-scale ceiling of {M_CEILING}")
    _no_leftovers(spectrum, "spectrum")

    known = {"geometry", "kernel", "target", "run", "output", "spectrum"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    return ExperimentConfig(
        geometry=geometry, profile=profile, m_grid=m_grid, trials=trials,
        test_points=test_points, seed=seed, out_dir=out_dir, formats=formats,
        workers=workers, budget_seconds=budget_seconds, degree=degree,
        spectrum_m=spectrum_m,
    )


def apply_overrides(cfg: ExperimentConfig, *, out=None, seed=None, trials=None,
                    formats=None, budget_seconds=None, workers=None,
                    degree=None, spectrum_m=None) -> ExperimentConfig:
    """Apply command-line overrides on top of a parsed config."""
    updates = {}
    if out is not None:
        updates["out_dir"] = Path(out)
    if seed is not None:
        updates["seed"] = _int_in(seed, "--seed", 0)
    if trials is not None:
        updates["trials"] = _int_in(trials, "--trials", 1)
    if formats is not None:
        fmts = tuple(f.strip() for f in formats.split(",") if f.strip())
        bad = [f for f in fmts if f not in FORMATS]
        if bad or not fmts:
            raise ConfigError(f"--format must be a comma list from {list(FORMATS)}")
        updates["formats"] = fmts
    if budget_seconds is not None:
        updates["budget_seconds"] = float(budget_seconds)
    if workers is not None:
        updates["workers"] = _int_in(workers, "--workers", 1)
    if degree is not None:
        updates["degree"] = _int_in(degree, "--degree", 1)
    if spectrum_m is not None:
        updates["spectrum_m"] = _int_in(spectrum_m, "--m", 2)
    return replace(cfg, **updates) if updates else cfg
