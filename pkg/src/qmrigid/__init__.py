"""Exact computations in quantum matrices R_q[M_n] and their Cauchon quantum torus."""

__version__ = "0.1.0"

from .qfield import Scalar, q, qpow
from .pbw import PBWElement, Presentation, check_relations
from .qmatrix import QuantumMatrices, build_presentation
from .qtorus import QuantumTorus, TorusElement, kernel_lattice
from .cauchon import run_cauchon, verify_theorem_ca1
from .autos import UnipotentAut, TruncatedSeries, solve_unipotent

__all__ = [
    "Scalar",
    "q",
    "qpow",
    "PBWElement",
    "Presentation",
    "check_relations",
    "QuantumMatrices",
    "build_presentation",
    "QuantumTorus",
    "TorusElement",
    "kernel_lattice",
    "run_cauchon",
    "verify_theorem_ca1",
    "UnipotentAut",
    "TruncatedSeries",
    "solve_unipotent",
]
