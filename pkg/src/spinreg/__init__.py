"""Dephasing of qubit registers in a thermal bosonic bath: decoherence
factors, environment fidelities, protected subspaces and SBS diagnostics."""
from .core import (
    DephasingMatrices,
    Geometry,
    PairDelta,
    RegisterLabel,
    all_labels,
    log_decoherence,
    log_fidelity,
    log_real_decoherence,
    pair_delta,
    to_spin_boson_convention,
)
from .kernels import BathSpec, FrequencyWindow, SpectralDensity, assemble

__all__ = [
    "BathSpec",
    "DephasingMatrices",
    "FrequencyWindow",
    "Geometry",
    "PairDelta",
    "RegisterLabel",
    "SpectralDensity",
    "all_labels",
    "assemble",
    "log_decoherence",
    "log_fidelity",
    "log_real_decoherence",
    "pair_delta",
    "to_spin_boson_convention",
]

__version__ = "0.1.0"
