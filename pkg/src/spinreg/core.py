"""Register labels, transit-time geometry and the quadratic forms that turn
the dephasing matrices into per-pair decoherence factors and fidelities.

Units are dimensionless throughout: frequencies in units of the cutoff
``Lambda``, times in units of ``1/Lambda``, hbar = k_B = 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

UP = 0.5
DOWN = -0.5

__all__ = [
    "RegisterLabel",
    "PairDelta",
    "Geometry",
    "DephasingMatrices",
    "all_labels",
    "pair_delta",
    "log_decoherence",
    "log_real_decoherence",
    "log_fidelity",
    "to_spin_boson_convention",
    "iter_pairs",
]


@dataclass(frozen=True)
class RegisterLabel:
    """Pointer-basis label: one spin value +1/2 or -1/2 per qubit."""

    spins: tuple[float, ...]

    def __post_init__(self):
        spins = tuple(float(x) for x in self.spins)
        if len(spins) < 1:
            raise ValueError("a register label needs at least one qubit")
        if any(x not in (UP, DOWN) for x in spins):
            raise ValueError(f"spin values must be +1/2 or -1/2, got {spins}")
        object.__setattr__(self, "spins", spins)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "RegisterLabel":
        """Bit 0 maps to +1/2, bit 1 maps to -1/2."""
        return cls(tuple(UP if int(b) == 0 else DOWN for b in bits))

    @classmethod
    def parse(cls, text: str) -> "RegisterLabel":
        """Parse a compact string of ``+`` and ``-`` characters, e.g. ``"+-"``."""
        text = text.strip()
        if not text or any(c not in "+-" for c in text):
            raise ValueError(f"cannot parse register label {text!r}")
        return cls(tuple(UP if c == "+" else DOWN for c in text))

    def to_bits(self) -> tuple[int, ...]:
        return tuple(0 if x == UP else 1 for x in self.spins)

    @property
    def L(self) -> int:
        return len(self.spins)

    @property
    def magnetization(self) -> float:
        return float(sum(self.spins))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.spins, dtype=float)

    def __str__(self) -> str:
        return "".join("+" if x == UP else "-" for x in self.spins)

    def __lt__(self, other: "RegisterLabel") -> bool:
        # +1/2 sorts before -1/2
        return self.to_bits() < other.to_bits()


def all_labels(L: int) -> list[RegisterLabel]:
    """All 2**L labels in lexicographic order with +1/2 < -1/2."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return [RegisterLabel.from_bits(b) for b in itertools.product((0, 1), repeat=L)]


def iter_pairs(labels: Sequence[RegisterLabel]):
    """Unordered off-diagonal pairs ``(a, b)`` with ``a`` before ``b``."""
    labels = sorted(labels)
    return itertools.combinations(labels, 2)


@dataclass(frozen=True)
class PairDelta:
    a: RegisterLabel
    b: RegisterLabel
    delta: np.ndarray = field(repr=False, compare=False)

    @property
    def L(self) -> int:
        return self.a.L

    def parity(self) -> int:
        """Product of all entries of the difference vector (L = 2: Table-I class)."""
        return int(round(float(np.prod(self.delta))))


def pair_delta(a: RegisterLabel, b: RegisterLabel) -> PairDelta:
    if a.L != b.L:
        raise ValueError(f"label lengths differ: {a.L} != {b.L}")
    delta = a.as_array() - b.as_array()
    delta.setflags(write=False)
    return PairDelta(a, b, delta)


@dataclass(frozen=True)
class Geometry:
    """Transit times between register qubits.

    ``signed`` holds ``tau_nm = (x_n - x_m) / c``, an antisymmetric matrix.
    Only its magnitude enters the cosine kernels; the sign matters for the
    antisymmetric phase matrix ``gamma_minus``.
    """

    signed: np.ndarray

    def __post_init__(self):
        tau = np.array(self.signed, dtype=float)
        if tau.ndim != 2 or tau.shape[0] != tau.shape[1]:
            raise ValueError("transit-time matrix must be square")
        if not np.allclose(tau, -tau.T, rtol=0, atol=1e-12):
            raise ValueError("signed transit-time matrix must be antisymmetric")
        tau.setflags(write=False)
        object.__setattr__(self, "signed", tau)

    @classmethod
    def from_positions(cls, positions: Sequence[float], speed: float = 1.0) -> "Geometry":
        x = np.asarray(positions, dtype=float)
        if speed <= 0:
            raise ValueError("propagation speed must be positive")
        return cls((x[:, None] - x[None, :]) / speed)

    @classmethod
    def from_transit_matrix(cls, tau: Sequence[Sequence[float]]) -> "Geometry":
        """Build from a symmetric, zero-diagonal matrix of transit-time magnitudes.

        Qubits are taken to sit along the propagation axis in index order, so
        ``tau_nm`` is negative for ``n < m``.
        """
        tau = np.asarray(tau, dtype=float)
        if tau.ndim != 2 or tau.shape[0] != tau.shape[1]:
            raise ValueError("transit-time matrix must be square")
        if not np.allclose(tau, tau.T, rtol=0, atol=1e-12):
            raise ValueError("transit-time matrix must be symmetric")
        if np.any(np.diag(tau) != 0):
            raise ValueError("transit-time matrix must have a zero diagonal")
        if np.any(tau < 0):
            raise ValueError("transit times must be nonnegative")
        upper = np.triu(np.ones_like(tau), 1)
        return cls(-tau * upper + tau.T * upper.T)

    @classmethod
    def collective(cls, L: int) -> "Geometry":
        return cls(np.zeros((L, L)))

    @property
    def L(self) -> int:
        return self.signed.shape[0]

    @property
    def transit(self) -> np.ndarray:
        return np.abs(self.signed)

    def is_collective(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.signed), initial=0.0) <= tol)


@dataclass(frozen=True)
class DephasingMatrices:
    """The four L x L matrices at one time.

    ``fid`` maps a macrofraction id to its fidelity matrix. ``error`` is the
    largest quadrature error estimate over all entries (0 for closed forms).
    """

    gamma: np.ndarray
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    fid: Mapping[str, np.ndarray]
    time: float
    error: float = 0.0

    @property
    def L(self) -> int:
        return self.gamma.shape[0]


def _check_dims(d: PairDelta, m: DephasingMatrices):
    if d.L != m.L:
        raise ValueError(f"pair has L={d.L} but matrices are {m.L}x{m.L}")


def log_decoherence(d: PairDelta, m: DephasingMatrices) -> complex:
    """``-log gamma`` for the pair, real part from the difference vector and
    imaginary part from the phase matrices."""
    _check_dims(d, m)
    e, e2 = d.a.as_array(), d.b.as_array()
    re = float(d.delta @ m.gamma @ d.delta)
    im = float(e @ m.gamma_plus @ e - e2 @ m.gamma_plus @ e2 - 2.0 * e @ m.gamma_minus @ e2)
    return complex(re, im)


def log_real_decoherence(d: PairDelta, m: DephasingMatrices) -> float:
    _check_dims(d, m)
    return float(d.delta @ m.gamma @ d.delta)


def log_fidelity(d: PairDelta, m: DephasingMatrices, mac: str) -> float:
    """``-log B`` for the pair as seen by macrofraction ``mac``."""
    _check_dims(d, m)
    try:
        b = m.fid[mac]
    except KeyError:
        raise KeyError(f"unknown macrofraction {mac!r}; have {sorted(m.fid)}") from None
    return float(d.delta @ b @ d.delta)


def to_spin_boson_convention(value):
    """Convert a ``-log`` value from the register convention (J_z = sigma_z/2)
    to the spin-boson convention (coupling through sigma_z): multiply by 4."""
    return 4.0 * value
