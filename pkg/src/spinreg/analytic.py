"""Closed forms of the four kernels for the uncut (full-spectrum) bath.

Valid for integer Ohmicity ``s >= 2`` and cutoff 1. The decoherence and
fidelity kernels split into a vacuum part, shared by both, and a thermal
part written with polygamma functions of order ``s - 2``.

Conventions pinned against the quadrature kernels:

* ``gamma_minus`` = G(s-1)/2 [2 S(tau) - S(t+) + S(t-)], which vanishes at
  tau = 0 (the t- and t+ sine terms enter with opposite signs).
* the thermal bracket of ``gamma`` is its real part, i.e. half of
  "bracket + complex conjugate".
"""
from __future__ import annotations

import math

import numpy as np

from .core import DephasingMatrices, Geometry
from .specfun import gamma_fn, polygamma

__all__ = [
    "retarded_times",
    "gamma_vac",
    "fidelity_vac",
    "gamma_th",
    "gamma_analytic",
    "gamma_plus_analytic",
    "gamma_minus_analytic",
    "fidelity_th_analytic",
    "fidelity_analytic",
    "analytic_matrices",
]


def _check_s(s):
    if int(s) != s or s < 2:
        raise ValueError(f"closed forms need integer s >= 2, got {s}; use the quadrature kernels")
    return int(s)


def retarded_times(tau, t):
    """Advanced and retarded times ``(t + tau, t - tau)``."""
    return t + tau, t - tau


def _power(s, x):
    # (1 + x^2)**((1-s)/2), in log space so large t cannot overflow
    x = np.asarray(x, dtype=float)
    return np.exp(0.5 * (1.0 - s) * np.log1p(x * x))


def _c(s, x):
    return _power(s, x) * np.cos((s - 1) * np.arctan(x))


def _s(s, x):
    return _power(s, x) * np.sin((s - 1) * np.arctan(x))


def gamma_vac(s, tau, t):
    s = _check_s(s)
    tp, tm = retarded_times(tau, t)
    out = 0.5 * gamma_fn(s - 1) * (2.0 * _c(s, tau) - _c(s, tm) - _c(s, tp))
    return out[()] if np.ndim(out) == 0 else out


# vacuum parts of decoherence and fidelity coincide
fidelity_vac = gamma_vac


def _thermal_args(tau_T, x, half):
    if half:
        return 1.0 / (2.0 * tau_T) - 1j * np.asarray(x, dtype=float) / (2.0 * tau_T)
    return 1.0 / tau_T - 1j * np.asarray(x, dtype=float) / tau_T


def _psi(m, z):
    z = np.asarray(z)
    assert np.all(z.real >= 0.5), "closed forms only call polygamma with Re z >= 1/2"
    return polygamma(m, z)


def gamma_th(s, tau, t, tau_T):
    """Thermal correction to ``gamma``; zero at zero temperature (tau_T = inf)."""
    s = _check_s(s)
    if not tau_T > 0:
        raise ValueError("thermal time must be positive")
    if math.isinf(tau_T):
        return 0.0 * np.asarray(t + tau, dtype=float)
    m = s - 2
    tp, tm = retarded_times(tau, t)
    a = lambda x: 1.0 + _thermal_args(tau_T, x, half=False)  # noqa: E731
    bracket = 2.0 * _psi(m, a(tau)) - _psi(m, a(tp)) - _psi(m, a(tm))
    out = (-1.0) ** (s - 1) / tau_T ** (s - 1) * np.real(bracket)
    return out[()] if np.ndim(out) == 0 else out


def gamma_analytic(s, tau, t, tau_T=math.inf):
    return gamma_vac(s, tau, t) + gamma_th(s, tau, t, tau_T)


def gamma_plus_analytic(s, tau, t):
    s = _check_s(s)
    tp, tm = retarded_times(tau, t)
    tau = np.asarray(tau, dtype=float)
    linear = 2.0 * (s - 1) * t * np.exp(-0.5 * s * np.log1p(tau * tau)) * np.cos(s * np.arctan(tau))
    out = 0.5 * gamma_fn(s - 1) * (linear - _s(s, tm) - _s(s, tp))
    return out[()] if np.ndim(out) == 0 else out


def gamma_minus_analytic(s, tau, t):
    s = _check_s(s)
    tp, tm = retarded_times(tau, t)
    out = 0.5 * gamma_fn(s - 1) * (2.0 * _s(s, tau) - _s(s, tp) + _s(s, tm))
    return out[()] if np.ndim(out) == 0 else out


def fidelity_th_analytic(s, tau, t, tau_T):
    """Thermal part of the fidelity kernel (polygamma at half-shifted arguments)."""
    s = _check_s(s)
    if not tau_T > 0:
        raise ValueError("thermal time must be positive")
    if math.isinf(tau_T):
        return 0.0 * np.asarray(t + tau, dtype=float)
    m = s - 2
    tp, tm = retarded_times(tau, t)

    def diff(x):
        a = _thermal_args(tau_T, x, half=True)
        return _psi(m, 1.0 + a) - _psi(m, 0.5 + a)

    bracket = 2.0 * diff(tau) - diff(tp) - diff(tm)
    out = (-1.0) ** (s - 1) / (2.0 * tau_T) ** (s - 1) * np.real(bracket)
    return out[()] if np.ndim(out) == 0 else out


def fidelity_analytic(s, tau, t, tau_T=math.inf):
    return fidelity_vac(s, tau, t) + fidelity_th_analytic(s, tau, t, tau_T)


def analytic_matrices(s: int, temperature: float, geometry: Geometry, t: float,
                      mac: str = "full") -> DephasingMatrices:
    """Closed-form matrices for the uncut bath (one macrofraction ``mac``)."""
    tau_T = math.inf if temperature == 0 else 1.0 / temperature
    tau = geometry.signed
    mag = np.abs(tau)
    gamma = np.asarray(gamma_analytic(s, mag, t, tau_T), dtype=float)
    gp = np.asarray(gamma_plus_analytic(s, mag, t), dtype=float)
    gm = np.asarray(gamma_minus_analytic(s, tau, t), dtype=float)
    fid = np.asarray(fidelity_analytic(s, mag, t, tau_T), dtype=float)
    return DephasingMatrices(gamma, gp, gm, {mac: fid}, float(t), 0.0)
