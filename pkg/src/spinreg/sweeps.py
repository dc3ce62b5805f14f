"""Time and cut-position sweeps producing deterministic CSV tables."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DephasingMatrices, RegisterLabel, log_decoherence, log_fidelity, pair_delta
from .kernels import assemble
from .scenario import Scenario

__all__ = [
    "SweepTable",
    "ToleranceExceeded",
    "pair_tag",
    "run_time_sweep",
    "run_cut_sweep",
    "run_scenario",
    "format_value",
]


class ToleranceExceeded(RuntimeError):
    """A quadrature error estimate exceeded the requested budget."""


def format_value(x: float) -> str:
    # 12 significant digits; normalize -0
    return format(float(x) + 0.0, ".12g")


def pair_tag(a: RegisterLabel, b: RegisterLabel) -> str:
    return f"{a}/{b}"


@dataclass
class SweepTable:
    header: list[str]
    rows: list[list[float]]
    max_error: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([format_value(x) for x in row])
        return buf.getvalue()

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _check_budget(m: DephasingMatrices, tolerance: float | None) -> None:
    if tolerance is None:
        return
    scale = max(1.0, *(float(np.max(np.abs(x))) for x in (m.gamma, m.gamma_plus, *m.fid.values())))
    if m.error > tolerance * scale:
        raise ToleranceExceeded(
            f"quadrature error {m.error:.3g} exceeds budget {tolerance:g} at t={m.time:g}")


def run_time_sweep(sc: Scenario, threads: int = 1, tolerance: float | None = None) -> SweepTable:
    """Columns: ``t``, then per pair ``re_neg_log_gamma``, ``im_neg_log_gamma``
    and ``neg_log_B[<macrofraction>]``."""
    if not sc.pairs:
        return SweepTable(["t"], [])
    bath = sc.bath()
    macs = list(bath.macrofractions)
    header = ["t"]
    for a, b in sc.pairs:
        tag = pair_tag(a, b)
        header += [f"{tag}:re_neg_log_gamma", f"{tag}:im_neg_log_gamma"]
        header += [f"{tag}:neg_log_B[{mac}]" for mac in macs]
    deltas = [pair_delta(a, b) for a, b in sc.pairs]

    def row(t):
        m = assemble(bath, sc.geometry, float(t))
        _check_budget(m, tolerance)
        out = [float(t)]
        for d in deltas:
            lg = log_decoherence(d, m)
            out += [lg.real, lg.imag]
            out += [log_fidelity(d, m, mac) for mac in macs]
        return out, m.error

    results = _map(row, sc.grid, threads)
    return SweepTable(header, [r for r, _ in results], max((e for _, e in results), default=0.0))


def run_cut_sweep(sc: Scenario, threads: int = 1, tolerance: float | None = None) -> SweepTable:
    """Columns: ``alpha``, then per pair the asymptotic ``re_neg_log_gamma``
    (complement window) and ``neg_log_B[obs]`` (observed window)."""
    if not sc.pairs:
        return SweepTable(["alpha"], [])
    header = ["alpha"]
    for a, b in sc.pairs:
        tag = pair_tag(a, b)
        header += [f"{tag}:re_neg_log_gamma", f"{tag}:neg_log_B[obs]"]
    deltas = [pair_delta(a, b) for a, b in sc.pairs]

    def row(alpha):
        m = assemble(sc.bath(float(alpha)), sc.geometry, sc.asymptotic_time)
        _check_budget(m, tolerance)
        out = [float(alpha)]
        for d in deltas:
            out += [log_decoherence(d, m).real, log_fidelity(d, m, "obs")]
        return out, m.error

    results = _map(row, sc.grid, threads)
    return SweepTable(header, [r for r, _ in results], max((e for _, e in results), default=0.0))


def run_scenario(sc: Scenario, threads: int = 1, tolerance: float | None = None) -> SweepTable:
    if sc.sweep_kind == "time":
        return run_time_sweep(sc, threads, tolerance)
    return run_cut_sweep(sc, threads, tolerance)
