"""Scenario files for the sweep runner.

The format is INI-style (``configparser``): ``[section]`` headers,
``key = value`` lines, indented continuation lines for multi-line values and
``#`` comments. Recognized keys::

    [model]     L
    [geometry]  tau (one matrix row per line) | positions, speed
    [bath]      s, T, unobserved, observed, cut.delta
    [sweep]     kind (time | cut), grid, time
    [pairs]     class (single singlet GHZ) | explicit (e.g. "+-/-+, ++/--")
    [output]    csv, plot

Numbers may be written as fractions (``T = 1/3``). Grids are either
``start:stop:step`` (inclusive stop) or a whitespace-separated list.
Windows are ``full`` or comma-separated ``lo:hi`` intervals (``hi`` may be
``inf``); ``observed`` may name macrofractions as ``name=lo:hi``.
Relative output paths resolve against the scenario file's directory.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import PairClass, representative_pair
from .core import Geometry, RegisterLabel
from .kernels import BathSpec, FrequencyWindow, SpectralDensity

__all__ = ["Scenario", "ScenarioError", "load_scenario", "parse_scenario"]

DEFAULT_ASYMPTOTIC_TIME = 100.0

_CLASS_ALIASES = {
    "single": PairClass.SINGLE,
    "single-qubit": PairClass.SINGLE,
    "singlet": PairClass.SINGLET,
    "minus": PairClass.SINGLET,
    "ghz": PairClass.GHZ,
    "plus": PairClass.GHZ,
}


class ScenarioError(ValueError):
    """Invalid scenario; carries the offending field and line (if known)."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(field)
        if line:
            where.append(f"line {line}")
        super().__init__(f"{' @ '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class Scenario:
    L: int
    geometry: Geometry
    s: float
    temperature: float
    sweep_kind: str
    grid: np.ndarray
    pairs: list[tuple[RegisterLabel, RegisterLabel]]
    unobserved: FrequencyWindow = field(default_factory=FrequencyWindow.full)
    observed: dict[str, FrequencyWindow] = field(default_factory=lambda: {"full": FrequencyWindow.full()})
    cut_delta: float = 0.0
    asymptotic_time: float = DEFAULT_ASYMPTOTIC_TIME
    csv_path: Path | None = None
    plot_path: Path | None = None

    def bath(self, alpha: float | None = None) -> BathSpec:
        """Bath for a time sweep, or for cut position ``alpha`` in a cut sweep."""
        if alpha is not None:
            return BathSpec.cut(self.s, self.temperature, alpha, self.cut_delta)
        return BathSpec(SpectralDensity(self.s), self.temperature, self.unobserved, self.observed)


def _line_index(text: str) -> dict[tuple[str, str], int]:
    index = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]$", line)
        if m:
            section = m.group(1).strip().lower()
            index[(section, "")] = no
            continue
        m = re.match(r"^([^=:#;\s][^=]*?)\s*=", line)
        if m and section and not raw[:1].isspace():
            index[(section, m.group(1).strip().lower())] = no
    return index


def _number(text: str) -> float:
    text = text.strip()
    if text.lower() in ("inf", "+inf"):
        return math.inf
    return float(Fraction(text)) if "/" in text else float(text)


def _grid(text: str) -> np.ndarray:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range grid must be start:stop:step")
        start, stop, step = (_number(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(round((stop - start) / step))
        grid = start + step * np.arange(n + 1)
    else:
        grid = np.array([_number(p) for p in text.split()])
    if grid.size == 0:
        raise ValueError("grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def _window(text: str) -> FrequencyWindow:
    text = text.strip()
    if text.lower() == "full":
        return FrequencyWindow.full()
    ivs = []
    for part in text.split(","):
        lo, hi = part.split(":")
        ivs.append((_number(lo), _number(hi)))
    return FrequencyWindow(tuple(ivs))


def _macrofractions(text: str) -> dict[str, FrequencyWindow]:
    text = text.strip()
    if "=" not in text:
        return {"full" if text.lower() == "full" else "obs": _window(text)}
    out = {}
    for part in text.split(";"):
        name, win = part.split("=", 1)
        out[name.strip()] = _window(win)
    return out


def _pair(text: str, L: int) -> tuple[RegisterLabel, RegisterLabel]:
    a, b = text.split("/")
    pa, pb = RegisterLabel.parse(a), RegisterLabel.parse(b)
    if pa.L != L or pb.L != L:
        raise ValueError(f"pair {text.strip()!r} does not match L = {L}")
    if pa == pb:
        raise ValueError(f"pair {text.strip()!r} is diagonal")
    return pa, pb


def parse_scenario(text: str, base_dir: Path | None = None) -> Scenario:
    lines = _line_index(text)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(str(exc).splitlines()[0], line=getattr(exc, "lineno", None)) from exc

    def where(section, key):
        return f"{section}.{key}", lines.get((section, key.lower()), lines.get((section, "")))

    def get(section, key, conv, default=None, required=True):
        fld, line = where(section, key)
        if not cp.has_option(section, key):
            if required:
                raise ScenarioError("missing required key", fld, lines.get((section, "")))
            return default
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, ZeroDivisionError, KeyError) as exc:
            raise ScenarioError(str(exc) or "invalid value", fld, line) from exc

    def positive_int(raw):
        v = int(raw)
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    L = get("model", "L", positive_int)

    if cp.has_option("geometry", "tau"):
        def tau_matrix(raw):
            rows = [r.split() for r in raw.strip().splitlines() if r.strip()]
            mat = np.array([[_number(x) for x in r] for r in rows]) if rows else np.zeros((0, 0))
            if mat.shape != (L, L):
                raise ValueError(f"expected a {L}x{L} matrix, got shape {mat.shape}")
            return Geometry.from_transit_matrix(mat)
        geometry = get("geometry", "tau", tau_matrix)
    elif cp.has_option("geometry", "positions"):
        speed = get("geometry", "speed", _number, default=1.0, required=False)

        def from_positions(raw):
            x = [_number(v) for v in raw.split()]
            if len(x) != L:
                raise ValueError(f"expected {L} positions")
            return Geometry.from_positions(x, speed)
        geometry = get("geometry", "positions", from_positions)
    elif L == 1:
        geometry = Geometry.collective(1)
    else:
        raise ScenarioError("need geometry.tau or geometry.positions", "geometry",
                            lines.get(("geometry", "")))

    def s_value(raw):
        v = _number(raw)
        SpectralDensity(v)
        return v

    def temperature(raw):
        v = _number(raw)
        if v < 0:
            raise ValueError("temperature must be >= 0")
        return v

    s = get("bath", "s", s_value)
    T = get("bath", "T", temperature)
    unobserved = get("bath", "unobserved", _window, default=FrequencyWindow.full(), required=False)
    observed = get("bath", "observed", _macrofractions,
                   default={"full": FrequencyWindow.full()}, required=False)

    def kind(raw):
        v = raw.strip().lower()
        if v not in ("time", "cut"):
            raise ValueError("sweep.kind must be 'time' or 'cut'")
        return v

    sweep_kind = get("sweep", "kind", kind)
    grid = get("sweep", "grid", _grid)
    if sweep_kind == "time" and grid[0] < 0:
        raise ScenarioError("times must be >= 0", *where("sweep", "grid"))
    if sweep_kind == "cut" and grid[0] < 0:
        raise ScenarioError("cut positions must be >= 0", *where("sweep", "grid"))

    def nonneg(raw):
        v = _number(raw)
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    delta = get("bath", "cut.delta", nonneg, default=0.0, required=sweep_kind == "cut")
    t_asym = get("sweep", "time", nonneg, default=DEFAULT_ASYMPTOTIC_TIME, required=False)

    def classes(raw):
        if L != 2:
            raise ValueError("pair classes are defined for L = 2 only")
        out = []
        for tok in raw.replace(",", " ").split():
            try:
                out.append(representative_pair(_CLASS_ALIASES[tok.lower()]))
            except KeyError:
                raise ValueError(f"unknown pair class {tok!r}") from None
        return out

    def explicit(raw):
        return [_pair(p, L) for p in re.split(r"[,;\n]", raw) if p.strip()]

    pairs = []
    if cp.has_option("pairs", "class"):
        pairs += get("pairs", "class", classes)
    if cp.has_option("pairs", "explicit"):
        pairs += get("pairs", "explicit", explicit)

    base = base_dir or Path.cwd()
    resolve = lambda raw: (base / raw.strip()) if raw.strip() else None  # noqa: E731
    csv_path = get("output", "csv", resolve, required=False)
    plot_path = get("output", "plot", resolve, required=False)

    try:
        sc = Scenario(L, geometry, s, T, sweep_kind, grid, pairs, unobserved, observed,
                      delta, t_asym, csv_path, plot_path)
        sc.bath(grid[0] if sweep_kind == "cut" else None)
    except ValueError as exc:
        raise ScenarioError(str(exc), "bath", lines.get(("bath", ""))) from exc
    return sc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}", str(path)) from exc
    return parse_scenario(text, path.parent)
