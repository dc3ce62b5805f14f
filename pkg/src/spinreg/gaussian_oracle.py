"""Discrete-mode ground truth built from displaced thermal states.

Each bath mode evolves under the pointer-controlled unitary
``D(alpha(t) * eps.g) exp(i |eps.g|^2 xi(t))``. The decoherence overlap and
the Uhlmann fidelity of the conditional mode states follow from
Gaussian-state algebra, with no reference to the matrix summands they are
used to validate.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Geometry, RegisterLabel
from .kernels import BathSpec, FrequencyWindow, kernel_table

__all__ = [
    "ModeSpec",
    "DisplacedThermalMode",
    "ModeGrid",
    "RiemannReport",
    "alpha_t",
    "xi_t",
    "thermal_occupation",
    "conditional_state",
    "gaussian_fidelity",
    "log_gaussian_fidelity",
    "mode_decoherence",
    "mode_log_decoherence",
    "mode_fidelity",
    "mode_log_fidelity",
    "mode_summands",
    "riemann_sum_check",
]


def alpha_t(omega, t):
    """Displacement amplitude ``(1 - exp(i w t)) / w``."""
    omega = np.asarray(omega, dtype=float)
    return -2j * np.exp(0.5j * omega * t) * np.sin(0.5 * omega * t) / omega


def xi_t(omega, t):
    """Phase function ``(w t - sin w t) / w**2``; tends to t**3/6 as w -> 0."""
    omega = np.asarray(omega, dtype=float)
    u = omega * t
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, omega)
    exact = (u - np.sin(u)) / safe**2
    series = t**3 / 6.0 * (1.0 - u**2 / 20.0)
    out = np.where(small, series, exact)
    return out[()] if out.ndim == 0 else out


def thermal_occupation(omega: float, temperature: float) -> float:
    if temperature == 0:
        return 0.0
    if math.isinf(temperature):
        return math.inf
    return 1.0 / math.expm1(omega / temperature)


@dataclass(frozen=True)
class ModeSpec:
    """One bath mode coupled to every qubit with ``g_n = g exp(-i k.r_n)``."""

    omega: float
    g: float
    phases: tuple[float, ...]

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("mode frequency must be positive")
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))

    @classmethod
    def from_geometry(cls, omega: float, g: float, geometry: Geometry) -> "ModeSpec":
        # k.r_n = omega * tau_{n0}, so k.(r_n - r_m) = omega * tau_nm
        return cls(omega, g, tuple(omega * geometry.signed[:, 0]))

    def couplings(self) -> np.ndarray:
        return self.g * np.exp(-1j * np.asarray(self.phases))


@dataclass(frozen=True)
class DisplacedThermalMode:
    beta: complex
    nbar: float

    def __post_init__(self):
        if not self.nbar >= 0:
            raise ValueError("thermal occupation must be nonnegative")

    def mean(self) -> np.ndarray:
        """Quadrature means ``(<x>, <p>)`` with ``x = (a + a^dag)/sqrt 2``."""
        return math.sqrt(2.0) * np.array([self.beta.real, self.beta.imag])

    def covariance(self) -> np.ndarray:
        """Covariance matrix; the vacuum has ``I / 2``."""
        return (self.nbar + 0.5) * np.eye(2)


def conditional_state(mode: ModeSpec, eps: RegisterLabel, temperature: float,
                      t: float) -> DisplacedThermalMode:
    """Mode state after evolving the thermal state under the eps-branch unitary."""
    beta = complex(alpha_t(mode.omega, t) * (eps.as_array() @ mode.couplings()))
    return DisplacedThermalMode(beta, thermal_occupation(mode.omega, temperature))


def log_gaussian_fidelity(r1: DisplacedThermalMode, r2: DisplacedThermalMode) -> float:
    """Logarithm of the root (Uhlmann) fidelity
    ``tr sqrt(sqrt(r1) r2 sqrt(r1))`` of two single-mode Gaussian states."""
    v1, v2 = r1.covariance(), r2.covariance()
    d = r1.mean() - r2.mean()
    big = np.linalg.det(v1 + v2)
    small = 4.0 * (np.linalg.det(v1) - 0.25) * (np.linalg.det(v2) - 0.25)
    log_fsq = -math.log(math.sqrt(big + small) - math.sqrt(small)) \
        - 0.5 * d @ np.linalg.solve(v1 + v2, d)
    return 0.5 * log_fsq


def gaussian_fidelity(r1: DisplacedThermalMode, r2: DisplacedThermalMode) -> float:
    return math.exp(log_gaussian_fidelity(r1, r2))


def _check(mode: ModeSpec, eps: RegisterLabel, eps2: RegisterLabel):
    if eps.L != eps2.L or eps.L != len(mode.phases):
        raise ValueError("label lengths and mode phases must agree")


def mode_log_decoherence(mode: ModeSpec, eps: RegisterLabel, eps2: RegisterLabel,
                         temperature: float, t: float) -> complex:
    """``log tr[U(t; eps) rho_th U(t; eps2)^dag]`` for one mode (finite T);
    stays representable where the overlap itself underflows."""
    _check(mode, eps, eps2)
    g = mode.couplings()
    alpha = complex(alpha_t(mode.omega, t))
    xi = float(xi_t(mode.omega, t))
    b1 = complex(eps.as_array() @ g)
    b2 = complex(eps2.as_array() @ g)
    a, b = alpha * b1, alpha * b2
    # U2^dag U1 = D(-b) D(a) exp(i(|b1|^2 - |b2|^2) xi) = D(a - b) exp(i Im(b* a)) ...
    phase = (b.conjugate() * a).imag + (abs(b1) ** 2 - abs(b2) ** 2) * xi
    if math.isinf(temperature):
        raise ValueError("log overlap diverges at infinite temperature")
    coth = 1.0 if temperature == 0 else 1.0 / math.tanh(mode.omega / (2.0 * temperature))
    # characteristic function of the thermal state: exp(-(nbar + 1/2)|lambda|^2)
    return complex(-0.5 * coth * abs(a - b) ** 2, phase)


def mode_decoherence(mode: ModeSpec, eps: RegisterLabel, eps2: RegisterLabel,
                     temperature: float, t: float) -> complex:
    """``tr[U(t; eps) rho_th U(t; eps2)^dag]`` for one mode."""
    if math.isinf(temperature):
        _check(mode, eps, eps2)
        g = mode.couplings()
        if abs(complex((eps.as_array() - eps2.as_array()) @ g) * complex(alpha_t(mode.omega, t))) > 0:
            return 0j
        return complex(1.0)  # equal displacements: the branch phases coincide
    return complex(cmath.exp(mode_log_decoherence(mode, eps, eps2, temperature, t)))


def mode_log_fidelity(mode: ModeSpec, eps: RegisterLabel, eps2: RegisterLabel,
                      temperature: float, t: float) -> float:
    _check(mode, eps, eps2)
    if math.isinf(temperature):
        return 0.0
    r1 = conditional_state(mode, eps, temperature, t)
    r2 = conditional_state(mode, eps2, temperature, t)
    return log_gaussian_fidelity(r1, r2)


def mode_fidelity(mode: ModeSpec, eps: RegisterLabel, eps2: RegisterLabel,
                  temperature: float, t: float) -> float:
    return math.exp(mode_log_fidelity(mode, eps, eps2, temperature, t))


def mode_summands(mode: ModeSpec, temperature: float, t: float) -> dict[str, np.ndarray]:
    """Single-mode contributions to the four matrices (mode-sum definitions)."""
    ph = np.asarray(mode.phases)
    diff = ph[:, None] - ph[None, :]
    weight = 0.5 * abs(mode.g * complex(alpha_t(mode.omega, t))) ** 2
    if temperature == 0:
        coth = tanh = 1.0
    elif math.isinf(temperature):
        coth, tanh = math.inf, 0.0
    else:
        tanh = math.tanh(mode.omega / (2.0 * temperature))
        coth = 1.0 / tanh
    return {
        "gamma": weight * coth * np.cos(diff),
        "gamma_plus": mode.g**2 * float(xi_t(mode.omega, t)) * np.cos(diff),
        "gamma_minus": weight * np.sin(diff),
        "fid": weight * tanh * np.cos(diff),
    }


@dataclass(frozen=True)
class ModeGrid:
    """Midpoint discretization of ``[0, omega_max]`` into ``n_modes`` modes."""

    omega_max: float
    n_modes: int

    @property
    def spacing(self) -> float:
        return self.omega_max / self.n_modes

    def frequencies(self) -> np.ndarray:
        return (np.arange(self.n_modes) + 0.5) * self.spacing

    def refined(self, factor: int = 2) -> "ModeGrid":
        return ModeGrid(self.omega_max, self.n_modes * factor)


@dataclass(frozen=True)
class RiemannReport:
    discrete: dict[str, float]
    continuum: dict[str, float]
    gap: dict[str, float]
    under_resolved: bool

    @property
    def max_gap(self) -> float:
        return max(self.gap.values())


def _in_window(w: np.ndarray, window: FrequencyWindow) -> np.ndarray:
    mask = np.zeros(w.shape, dtype=bool)
    for lo, hi in window.intervals:
        mask |= (w >= lo) & (w < hi)
    return mask


def riemann_sum_check(bath: BathSpec, grid: ModeGrid, tau: float, t: float,
                      mac: str | None = None) -> RiemannReport:
    """Compare the discrete mode sum of the (n, m) = (0, 1) summands with
    the continuum kernels for a two-qubit pair separated by transit time ``tau``.

    Modes carry ``g_k**2 = J(w_k) dw``. ``gap`` is relative, with an
    absolute floor of 1e-12. The continuum side is cut at ``grid.omega_max``.
    """
    if mac is None:
        mac = next(iter(bath.macrofractions), None)
    w = grid.frequencies()
    dw = grid.spacing
    under = dw * max(abs(t), abs(tau)) > 0.1
    g2 = bath.sd(w) * dw
    geometry = Geometry(np.array([[0.0, tau], [-tau, 0.0]]))

    sums = {k: 0.0 for k in ("gamma", "gamma_plus", "gamma_minus", "fid")}
    unobs = _in_window(w, bath.unobserved)
    obs = _in_window(w, bath.macrofractions[mac]) if mac is not None else np.zeros_like(unobs)
    for wk, gk2, u, o in zip(w, g2, unobs, obs):
        if not (u or o):
            continue
        terms = mode_summands(ModeSpec.from_geometry(wk, math.sqrt(gk2), geometry),
                              bath.temperature, t)
        if u:
            for k in ("gamma", "gamma_plus", "gamma_minus"):
                sums[k] += terms[k][0, 1]
        if o:
            sums["fid"] += terms["fid"][0, 1]

    cont = {}
    clip = lambda win: FrequencyWindow(tuple(win.clipped(grid.omega_max)))  # noqa: E731
    v, _ = kernel_table(bath.sd, bath.temperature, clip(bath.unobserved),
                        ["gamma", "gamma_plus", "gamma_minus"], [geometry.signed[0, 1]], [t])
    for k in ("gamma", "gamma_plus", "gamma_minus"):
        cont[k] = float(v[k][0, 0])
    if mac is not None:
        vf, _ = kernel_table(bath.sd, bath.temperature, clip(bath.macrofractions[mac]),
                             ["fid"], [tau], [t])
        cont["fid"] = float(vf["fid"][0, 0])
    else:
        cont["fid"] = 0.0
    gap = {k: abs(sums[k] - cont[k]) / max(abs(cont[k]), 1e-12) for k in sums}
    return RiemannReport(sums, cont, gap, under)
