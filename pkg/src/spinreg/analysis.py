"""Subspace structure of the register: pair classes, collective-limit
factors, decoherence/orthogonalization free subspaces and SBS reports."""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import (
    DephasingMatrices,
    Geometry,
    PairDelta,
    RegisterLabel,
    all_labels,
    iter_pairs,
    log_decoherence,
    log_fidelity,
    pair_delta,
)
from .kernels import BathSpec, assemble

__all__ = [
    "PairClass",
    "InitialRegister",
    "PairRecord",
    "CoarseSbsBlock",
    "SbsReport",
    "classify_pair_2q",
    "representative_pair",
    "collective_log_gamma",
    "collective_log_fidelity",
    "find_dfs_ofs",
    "check_dfs_general",
    "check_ofs_general",
    "sbs_report",
]

DFS_TOL = 1e-8
MAX_ENUM_L = 12


class PairClass(str, enum.Enum):
    DIAGONAL = "diagonal"
    SINGLE = "single-qubit"
    SINGLET = "singlet"
    GHZ = "GHZ"


def classify_pair_2q(d: PairDelta) -> PairClass:
    if d.L != 2:
        raise ValueError(f"two-qubit classification needs L = 2, got L = {d.L}")
    if not np.any(d.delta):
        return PairClass.DIAGONAL
    p = d.parity()
    if p == 0:
        return PairClass.SINGLE
    return PairClass.SINGLET if p < 0 else PairClass.GHZ


_REPRESENTATIVES = {
    PairClass.SINGLE: ("++", "+-"),
    PairClass.SINGLET: ("+-", "-+"),
    PairClass.GHZ: ("++", "--"),
}


def representative_pair(cls: PairClass | str) -> tuple[RegisterLabel, RegisterLabel]:
    """First pair of the class in table order (two-qubit register)."""
    a, b = _REPRESENTATIVES[PairClass(cls)]
    return RegisterLabel.parse(a), RegisterLabel.parse(b)


def collective_log_gamma(eps: RegisterLabel, eps2: RegisterLabel,
                         gamma11: float, gamma_plus11: float) -> complex:
    """``-log gamma`` when all transit times vanish."""
    d = pair_delta(eps, eps2)
    re = gamma11 * float(np.sum(d.delta)) ** 2
    im = gamma_plus11 * (eps.magnetization**2 - eps2.magnetization**2)
    return complex(re, im)


def collective_log_fidelity(eps: RegisterLabel, eps2: RegisterLabel, b11: float) -> float:
    d = pair_delta(eps, eps2)
    return b11 * float(np.sum(d.delta)) ** 2


def find_dfs_ofs(L: int, mode: str = "strong") -> list[tuple[RegisterLabel, ...]]:
    """Maximal label sets that are free of decoherence and orthogonalization
    in the collective regime.

    Labels are grouped by the collective invariants: the total magnetization
    for ``"weak"``, additionally its square for ``"strong"``. Fixing the
    magnetization fixes its square, so both modes give the L + 1
    magnetization classes; the brute-force grouping keeps the two conditions
    explicit.
    """
    if mode not in ("strong", "weak"):
        raise ValueError("mode must be 'strong' or 'weak'")
    if not 1 <= L <= MAX_ENUM_L:
        raise ValueError(f"enumeration limited to 1 <= L <= {MAX_ENUM_L}")
    groups: dict[tuple, list[RegisterLabel]] = defaultdict(list)
    for lab in all_labels(L):
        m = lab.magnetization
        key = (m, m * m) if mode == "strong" else (m,)
        groups[key].append(lab)
    # descending magnetization: +L/2 first
    return [tuple(groups[k]) for k in sorted(groups, key=lambda k: -k[0])]


def _pairwise(labels: Sequence[RegisterLabel]):
    labels = list(labels)
    if not labels:
        raise ValueError("label set is empty")
    if len(set(labels)) != len(labels):
        raise ValueError("labels must be pairwise distinct")
    L = labels[0].L
    if any(lab.L != L for lab in labels):
        raise ValueError("labels have different lengths")
    return [pair_delta(a, b) for a, b in iter_pairs(labels)]


def check_dfs_general(bath: BathSpec, geometry: Geometry, labels: Sequence[RegisterLabel],
                      t_grid: Iterable[float], tol: float = DFS_TOL,
                      matrices: Sequence[DephasingMatrices] | None = None) -> str:
    """Numerically classify a label set as a ``"strong"`` DFS (gamma = 1),
    ``"weak"`` DFS (|gamma| = 1) or ``"none"`` on the given time grid."""
    pairs = _pairwise(labels)
    if matrices is None:
        matrices = [assemble(bath, geometry, t) for t in t_grid]
    strong = weak = True
    for m in matrices:
        for d in pairs:
            gamma = np.exp(-log_decoherence(d, m))
            if abs(1.0 - gamma) > tol:
                strong = False
            if abs(1.0 - abs(gamma)) > tol:
                weak = False
                break
        if not weak:
            return "none"
    return "strong" if strong else "weak"


def check_ofs_general(bath: BathSpec, geometry: Geometry, labels: Sequence[RegisterLabel],
                      t_grid: Iterable[float], tol: float = DFS_TOL,
                      matrices: Sequence[DephasingMatrices] | None = None) -> bool:
    """True if every macrofraction fidelity stays 1 for all pairs on the grid."""
    pairs = _pairwise(labels)
    if matrices is None:
        matrices = [assemble(bath, geometry, t) for t in t_grid]
    for m in matrices:
        for mac in m.fid:
            for d in pairs:
                if abs(1.0 - math.exp(-log_fidelity(d, m, mac))) > tol:
                    return False
    return True


@dataclass(frozen=True)
class InitialRegister:
    """Initial register density matrix in the pointer basis (``all_labels`` order)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        n = c.shape[0]
        if c.ndim != 2 or c.shape[1] != n or n & (n - 1) or n < 2:
            raise ValueError("coefficients must be a 2**L x 2**L matrix")
        if not np.allclose(c, c.conj().T, atol=1e-10):
            raise ValueError("initial state must be Hermitian")
        if abs(np.trace(c) - 1.0) > 1e-10:
            raise ValueError("initial state must have unit trace")
        if np.linalg.eigvalsh(c).min() < -1e-10:
            raise ValueError("initial state must be positive semidefinite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def pure(cls, amplitudes: Sequence[complex]) -> "InitialRegister":
        psi = np.asarray(amplitudes, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def uniform_superposition(cls, L: int) -> "InitialRegister":
        return cls.pure(np.ones(2**L))

    @property
    def L(self) -> int:
        return int(round(math.log2(self.coeffs.shape[0])))

    def labels(self) -> list[RegisterLabel]:
        return all_labels(self.L)

    def support(self, tol: float = 1e-14) -> list[RegisterLabel]:
        diag = np.real(np.diag(self.coeffs))
        return [lab for lab, p in zip(self.labels(), diag) if p > tol]

    def block(self, labels: Sequence[RegisterLabel]) -> np.ndarray:
        index = {lab: i for i, lab in enumerate(self.labels())}
        idx = [index[lab] for lab in labels]
        return self.coeffs[np.ix_(idx, idx)]


@dataclass(frozen=True)
class PairRecord:
    eps: RegisterLabel
    eps2: RegisterLabel
    abs_gamma: float
    fidelity: dict[str, float]
    pair_class: PairClass | None


@dataclass(frozen=True)
class CoarseSbsBlock:
    """A DFS block of the coarse-grained SBS state.

    ``block`` is the initial state projected onto ``support`` (rows/columns in
    support order). All labels in the block share the magnetization
    ``magnetization``, which fixes the common environment displacement.
    """

    support: tuple[RegisterLabel, ...]
    block: np.ndarray
    magnetization: float
    macrofractions: tuple[str, ...]


@dataclass(frozen=True)
class SbsReport:
    time: float
    pairs: list[PairRecord]
    dfs_subspaces: list[tuple[tuple[RegisterLabel, ...], str]]
    ofs_subspaces: list[tuple[RegisterLabel, ...]]
    blocks: list[CoarseSbsBlock] = field(default_factory=list)
    sbs_distance: float = 1.0


def _default_t_grid(t: float) -> np.ndarray:
    return np.unique(np.concatenate([np.linspace(0.0, 20.0, 21)[1:], [t] if t > 0 else []]))


def sbs_report(initial: InitialRegister, bath: BathSpec, geometry: Geometry, t: float,
               t_grid: Iterable[float] | None = None, tol: float = DFS_TOL) -> SbsReport:
    """Pair-level proximity to SBS at time ``t``.

    DFS/OFS candidates are the collective magnetization classes restricted to
    the initial support; a candidate is kept only if it passes the numerical
    checks on ``t_grid``. Pairs inside a kept DFS+OFS block are coarse-grained
    away and do not enter ``sbs_distance``, the largest ``max(|gamma|, B)``
    over the remaining off-diagonal pairs in the support (0 when no such
    pair is left).
    """
    if initial.L != geometry.L:
        raise ValueError("initial state and geometry have different register sizes")
    support = initial.support()
    m_now = assemble(bath, geometry, t)
    grid = _default_t_grid(t) if t_grid is None else np.asarray(list(t_grid), dtype=float)
    grid_mats = None

    dfs, ofs, blocks = [], [], []
    in_block: dict[RegisterLabel, int] = {}
    for cls_labels in find_dfs_ofs(initial.L, "strong"):
        cand = tuple(lab for lab in cls_labels if lab in set(support))
        if len(cand) < 2:
            continue
        if grid_mats is None:
            grid_mats = [assemble(bath, geometry, s) for s in grid]
        tag = check_dfs_general(bath, geometry, cand, grid, tol, matrices=grid_mats)
        is_ofs = check_ofs_general(bath, geometry, cand, grid, tol, matrices=grid_mats)
        if tag != "none":
            dfs.append((cand, tag))
        if is_ofs:
            ofs.append(cand)
        if tag != "none" and is_ofs:
            for lab in cand:
                in_block[lab] = len(blocks)
            blocks.append(CoarseSbsBlock(cand, initial.block(cand), cand[0].magnetization,
                                         tuple(bath.macrofractions)))

    records = []
    distance = 0.0
    for a, b in iter_pairs(support):
        d = pair_delta(a, b)
        g = float(abs(np.exp(-log_decoherence(d, m_now))))
        fids = {mac: math.exp(-log_fidelity(d, m_now, mac)) for mac in m_now.fid}
        cls = classify_pair_2q(d) if d.L == 2 else None
        records.append(PairRecord(a, b, g, fids, cls))
        same_block = a in in_block and in_block.get(a) == in_block.get(b)
        if not same_block:
            distance = max(distance, g, max(fids.values(), default=0.0))
    return SbsReport(float(t), records, dfs, ofs, blocks, distance)
