"""Gamma, Hurwitz zeta and polygamma functions at complex arguments.

Hurwitz zeta uses Euler-Maclaurin summation after shifting the argument to
``Re z >= 20``; polygamma of order ``m >= 1`` is routed through it, the
digamma function uses the recurrence plus its Stirling-type expansion.
All functions accept numpy arrays and broadcast.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

__all__ = ["gamma_fn", "hurwitz_zeta", "polygamma", "digamma", "bernoulli_even"]

_SHIFT = 20.0
_NTERMS = 14


def _bernoulli_numbers(n: int) -> list[Fraction]:
    # Akiyama-Tanigawa algorithm, B_1 = +1/2 convention (only even ones used)
    a = [Fraction(0)] * (n + 1)
    out = []
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return out


_B = _bernoulli_numbers(2 * _NTERMS + 2)


def bernoulli_even(k: int) -> float:
    """B_{2k} as a float."""
    return float(_B[2 * k])


def gamma_fn(x: float) -> float:
    """Euler gamma function for real ``x > 0``."""
    if not x > 0:
        raise ValueError(f"gamma_fn needs x > 0, got {x}")
    return math.gamma(x)


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _shift_counts(z: np.ndarray) -> np.ndarray:
    return np.ceil(np.maximum(0.0, _SHIFT - z.real)).astype(int)


def hurwitz_zeta(s: float, z):
    """``sum_{k>=0} (z + k)**(-s)`` for real ``s > 1`` and ``Re z > 0``."""
    s = float(s)
    if not s > 1:
        raise ValueError(f"hurwitz_zeta needs s > 1, got {s}")
    z = _as_complex(z)
    if np.any(z.real <= 0):
        raise ValueError("hurwitz_zeta needs Re z > 0")
    n = _shift_counts(z)
    head = np.zeros_like(z)
    for k in range(int(n.max(initial=0))):
        head = head + np.where(k < n, np.exp(-s * np.log(z + k)), 0.0)
    w = z + n
    logw = np.log(w)
    tail = np.exp((1.0 - s) * logw) / (s - 1.0) + 0.5 * np.exp(-s * logw)
    # Euler-Maclaurin corrections: B_2j/(2j)! * s(s+1)...(s+2j-2) * w**(-s-2j+1)
    rising = s
    for j in range(1, _NTERMS + 1):
        coeff = bernoulli_even(j) / math.factorial(2 * j) * rising
        tail = tail + coeff * np.exp((-s - 2 * j + 1) * logw)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    out = head + tail
    return out[()] if out.ndim == 0 else out


def digamma(z):
    z = _as_complex(z)
    _check_poles(z)
    n = _shift_counts(z)
    head = np.zeros_like(z)
    for k in range(int(n.max(initial=0))):
        head = head + np.where(k < n, 1.0 / (z + k), 0.0)
    w = z + n
    tail = np.log(w) - 0.5 / w
    w2 = 1.0 / (w * w)
    p = w2
    for k in range(1, _NTERMS + 1):
        tail = tail - bernoulli_even(k) / (2 * k) * p
        p = p * w2
    out = tail - head
    return out[()] if out.ndim == 0 else out


def _check_poles(z: np.ndarray):
    bad = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(bad):
        raise ValueError("polygamma has poles at nonpositive integers")


def polygamma(m: int, z):
    """Polygamma of order ``m`` (``m = 0`` is digamma) at complex ``z``.

    Arguments with ``Re z <= 0`` are handled by the upward recurrence only
    when they stay off the poles; the closed forms never need them.
    """
    if int(m) != m or m < 0:
        raise ValueError(f"polygamma order must be a nonnegative integer, got {m}")
    m = int(m)
    if m == 0:
        return digamma(z)
    z = _as_complex(z)
    _check_poles(z)
    sign = -1.0 if m % 2 == 0 else 1.0  # (-1)**(m+1)
    pos = z.real > 0
    if np.all(pos):
        out = sign * math.factorial(m) * hurwitz_zeta(m + 1, z)
        return out
    # recurrence down from z + n with Re > 0
    n = np.where(pos, 0, np.ceil(1.0 - z.real)).astype(int)
    zz = z + n
    out = sign * math.factorial(m) * np.asarray(hurwitz_zeta(m + 1, zz))
    for k in range(int(n.max(initial=0))):
        out = out - np.where(k < n, (-1.0) ** m * math.factorial(m) / (z + k) ** (m + 1), 0.0)
    return out[()] if out.ndim == 0 else out
