"""Continuum-limit matrix elements over arbitrary frequency windows.

For a spectral density ``J(w) = w**s / L**(s-1) * exp(-w/L)`` the four
kernels are

* gamma:        J(w) (1 - cos wt)/w^2 coth(w/2T) cos(w tau)
* gamma_plus:   J(w) (wt - sin wt)/w^2 cos(w tau)
* gamma_minus:  J(w) (1 - cos wt)/w^2 sin(w tau)
* fid:          J(w) (1 - cos wt)/w^2 tanh(w/2T) cos(w tau)

integrated over the unobserved window (first three) or a macrofraction
window (``fid``). Each entry function returns ``(value, error_estimate)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import DephasingMatrices, Geometry
from .quadrature import integrate

__all__ = [
    "SpectralDensity",
    "FrequencyWindow",
    "BathSpec",
    "QuadratureWarning",
    "KINDS",
    "kernel_table",
    "gamma_entry",
    "gamma_plus_entry",
    "gamma_minus_entry",
    "fidelity_entry",
    "assemble",
]

KINDS = ("gamma", "gamma_plus", "gamma_minus", "fid")

EPSABS = 1e-13
EPSREL = 1e-10


class QuadratureWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SpectralDensity:
    s: float
    cutoff: float = 1.0

    def __post_init__(self):
        if not self.s >= 1:
            raise ValueError(f"Ohmicity exponent must be >= 1, got {self.s}")
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        return w**self.s / self.cutoff ** (self.s - 1) * np.exp(-w / self.cutoff)

    def over_w2(self, w):
        """``J(w) / w**2`` evaluated in log space (finite for w > 0)."""
        w = np.asarray(w, dtype=float)
        lam = self.cutoff
        return np.exp((self.s - 2.0) * np.log(w) - w / lam - (self.s - 1.0) * math.log(lam))

    @property
    def omega_max(self) -> float:
        """Truncation point where w**s exp(-w) is negligible (< 1e-16 relative)."""
        return self.cutoff * (self.s * math.log(10.0) + 40.0)


@dataclass(frozen=True)
class FrequencyWindow:
    """Ordered, disjoint union of half-open intervals ``[lo, hi)``; ``hi`` may be inf."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        prev = 0.0
        for lo, hi in ivs:
            if lo < 0 or hi < lo:
                raise ValueError(f"invalid interval [{lo}, {hi})")
            if lo < prev:
                raise ValueError("intervals must be ordered and disjoint")
            prev = hi
        object.__setattr__(self, "intervals", tuple((lo, hi) for lo, hi in ivs if hi > lo))

    @classmethod
    def full(cls) -> "FrequencyWindow":
        return cls(((0.0, math.inf),))

    @classmethod
    def between(cls, lo: float, hi: float) -> "FrequencyWindow":
        return cls(((lo, hi),))

    @classmethod
    def outside(cls, lo: float, hi: float) -> "FrequencyWindow":
        """Complement of ``[lo, hi)`` in ``[0, inf)``."""
        return cls(((0.0, lo), (hi, math.inf)))

    @property
    def is_full(self) -> bool:
        return self.intervals == ((0.0, math.inf),)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def overlaps(self, other: "FrequencyWindow") -> bool:
        return any(
            min(h1, h2) > max(l1, l2)
            for l1, h1 in self.intervals
            for l2, h2 in other.intervals
        )

    def split(self, at: float) -> tuple["FrequencyWindow", "FrequencyWindow"]:
        left, right = [], []
        for lo, hi in self.intervals:
            if hi <= at:
                left.append((lo, hi))
            elif lo >= at:
                right.append((lo, hi))
            else:
                left.append((lo, at))
                right.append((at, hi))
        return FrequencyWindow(tuple(left)), FrequencyWindow(tuple(right))

    def clipped(self, upper: float) -> list[tuple[float, float]]:
        return [(lo, min(hi, upper)) for lo, hi in self.intervals if lo < upper]


@dataclass(frozen=True)
class BathSpec:
    """Spectral density, temperature and the observed/unobserved split.

    ``temperature`` is in units of the cutoff; 0 selects the vacuum branch.
    A full-spectrum window may be shared (the "uncut" case, where observed
    and unobserved modes interleave across the whole spectrum); any other
    windows must be pairwise disjoint.
    """

    sd: SpectralDensity
    temperature: float
    unobserved: FrequencyWindow = field(default_factory=FrequencyWindow.full)
    macrofractions: Mapping[str, FrequencyWindow] = field(default_factory=dict)

    def __post_init__(self):
        if not self.temperature >= 0:
            raise ValueError("temperature must be >= 0")
        object.__setattr__(self, "macrofractions", dict(self.macrofractions))
        named = [("unobserved", self.unobserved)] + list(self.macrofractions.items())
        for i, (n1, w1) in enumerate(named):
            for n2, w2 in named[i + 1:]:
                if w1.is_full or w2.is_full:
                    continue
                if w1.overlaps(w2):
                    raise ValueError(f"windows {n1!r} and {n2!r} overlap")

    @classmethod
    def uncut(cls, s: float, temperature: float, cutoff: float = 1.0) -> "BathSpec":
        return cls(
            SpectralDensity(s, cutoff),
            temperature,
            FrequencyWindow.full(),
            {"full": FrequencyWindow.full()},
        )

    @classmethod
    def cut(cls, s: float, temperature: float, alpha: float, delta: float,
            cutoff: float = 1.0) -> "BathSpec":
        """Observed window ``[alpha, alpha + delta)``, its complement unobserved."""
        return cls(
            SpectralDensity(s, cutoff),
            temperature,
            FrequencyWindow.outside(alpha, alpha + delta),
            {"obs": FrequencyWindow.between(alpha, alpha + delta)},
        )

    @property
    def tau_T(self) -> float:
        return math.inf if self.temperature == 0 else 1.0 / self.temperature


def _one_minus_cos(u):
    return 2.0 * np.sin(0.5 * u) ** 2


def _u_minus_sin(u):
    small = np.abs(u) < 1e-2
    us = np.where(small, u, 0.0)
    series = us**3 / 6.0 * (1.0 - us**2 / 20.0 * (1.0 - us**2 / 42.0))
    return np.where(small, series, u - np.sin(u))


def _thermal(w, temperature, kind):
    if temperature == 0:
        return np.ones_like(w)
    if math.isinf(temperature):
        if kind == "gamma":
            raise ValueError("gamma kernel diverges at infinite temperature")
        return np.zeros_like(w)
    th = np.tanh(w / (2.0 * temperature))
    return 1.0 / th if kind == "gamma" else th


def _edges(window: FrequencyWindow, sd: SpectralDensity, panel: float) -> np.ndarray:
    pieces = []
    for lo, hi in window.clipped(sd.omega_max):
        n = max(1, math.ceil((hi - lo) / panel))
        pieces.append(np.linspace(lo, hi, n + 1))
    return pieces


def kernel_table(
    sd: SpectralDensity,
    temperature: float,
    window: FrequencyWindow,
    kinds: Sequence[str],
    taus: Sequence[float],
    times: Sequence[float],
    epsabs: float = EPSABS,
    epsrel: float = EPSREL,
) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Integrate the requested kernels for every (tau, t) combination at once.

    Returns ``(values, errors)``, dicts keyed by kind with arrays of shape
    ``(len(taus), len(times))``.
    """
    kinds = list(kinds)
    for k in kinds:
        if k not in KINDS:
            raise ValueError(f"unknown kernel kind {k!r}")
    taus = np.asarray(taus, dtype=float)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    nk, ntau, nt = len(kinds), len(taus), len(times)
    fast = max(np.max(np.abs(times), initial=0.0), np.max(np.abs(taus), initial=0.0), 1.0)
    panel = math.pi / fast * sd.cutoff
    values = {k: np.zeros((ntau, nt)) for k in kinds}
    errors = {k: np.zeros((ntau, nt)) for k in kinds}
    if window.is_empty or nk * ntau * nt == 0:
        return values, errors

    def f(w):
        base = sd.over_w2(w)
        wt = w[:, None] * times[None, :]
        wtau = w[:, None] * taus[None, :]
        cols = []
        for kind in kinds:
            if kind == "gamma_plus":
                osc = _u_minus_sin(wt)
            else:
                osc = _one_minus_cos(wt)
            if kind == "gamma_minus":
                spatial = np.sin(wtau)
            else:
                spatial = np.cos(wtau)
            pref = base
            if kind in ("gamma", "fid"):
                pref = base * _thermal(w, temperature, kind)
            cols.append(pref[:, None, None] * spatial[:, :, None] * osc[:, None, :])
        return np.stack(cols, axis=1).reshape(len(w), -1)

    total = np.zeros(nk * ntau * nt)
    err = np.zeros(nk * ntau * nt)
    converged = True
    for edges in _edges(window, sd, panel):
        res = integrate(f, edges, nk * ntau * nt, epsabs, epsrel)
        total += res.value
        err += res.error
        converged &= res.converged
    if not converged:
        warnings.warn("kernel quadrature did not reach its tolerance", QuadratureWarning)
    total = total.reshape(nk, ntau, nt)
    err = err.reshape(nk, ntau, nt)
    for i, k in enumerate(kinds):
        values[k] = total[i]
        errors[k] = err[i]
    return values, errors


def _entry(bath: BathSpec, window: FrequencyWindow, kind: str, tau: float, t: float):
    if t < 0:
        raise ValueError("t must be >= 0")
    v, e = kernel_table(bath.sd, bath.temperature, window, [kind], [tau], [t])
    return float(v[kind][0, 0]), float(e[kind][0, 0])


def gamma_entry(bath: BathSpec, tau_nm: float, t: float) -> tuple[float, float]:
    return _entry(bath, bath.unobserved, "gamma", tau_nm, t)


def gamma_plus_entry(bath: BathSpec, tau_nm: float, t: float) -> tuple[float, float]:
    return _entry(bath, bath.unobserved, "gamma_plus", tau_nm, t)


def gamma_minus_entry(bath: BathSpec, tau_nm: float, t: float) -> tuple[float, float]:
    return _entry(bath, bath.unobserved, "gamma_minus", tau_nm, t)


def fidelity_entry(bath: BathSpec, mac_id: str, tau_nm: float, t: float) -> tuple[float, float]:
    try:
        window = bath.macrofractions[mac_id]
    except KeyError:
        raise KeyError(f"unknown macrofraction {mac_id!r}") from None
    return _entry(bath, window, "fid", tau_nm, t)


def _fill(L, pairs, tau_index, row, odd=False):
    out = np.empty((L, L))
    for (n, m), (i, sign) in zip(pairs, tau_index):
        out[n, m] = row[i] * (sign if odd else 1.0)
    return out


def assemble(bath: BathSpec, geometry: Geometry, t: float) -> DephasingMatrices:
    """All four matrices at time ``t``, one quadrature pass per window."""
    if t < 0:
        raise ValueError("t must be >= 0")
    L = geometry.L
    signed = geometry.signed
    mags = sorted({0.0} | {abs(float(x)) for x in signed.ravel()})
    pairs = [(n, m) for n in range(L) for m in range(L)]
    tau_index = [(mags.index(abs(float(signed[n, m]))), np.sign(signed[n, m])) for n, m in pairs]

    v, e = kernel_table(bath.sd, bath.temperature, bath.unobserved,
                        ["gamma", "gamma_plus", "gamma_minus"], mags, [t])
    gamma = _fill(L, pairs, tau_index, v["gamma"][:, 0])
    gamma_plus = _fill(L, pairs, tau_index, v["gamma_plus"][:, 0])
    gamma_minus = _fill(L, pairs, tau_index, v["gamma_minus"][:, 0], odd=True)
    error = max(float(np.max(x)) for x in e.values())
    fid = {}
    for mac, window in bath.macrofractions.items():
        vf, ef = kernel_table(bath.sd, bath.temperature, window, ["fid"], mags, [t])
        fid[mac] = _fill(L, pairs, tau_index, vf["fid"][:, 0])
        error = max(error, float(np.max(ef["fid"], initial=0.0)))
    return DephasingMatrices(gamma, gamma_plus, gamma_minus, fid, float(t), error)
