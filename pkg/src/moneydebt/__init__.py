"""Fermionic money/debt Fock-space simulator.

Credit issuance is modeled as particle-hole pair creation: money modes are
particle-like, debt modes hole-like, and every Hamiltonian term is built as a
sparse matrix over the occupation-number basis.
"""

__version__ = "0.1.0"

from .fock import FockBasis, ModeId, OccupationState, Species, build_basis, debt, money
from .ops import Operator, QubitRegister
from .states import StateVector
from .evolve import TimeGrid, evolve_scheduled, evolve_static

__all__ = [
    "FockBasis",
    "ModeId",
    "OccupationState",
    "Operator",
    "QubitRegister",
    "Species",
    "StateVector",
    "TimeGrid",
    "build_basis",
    "debt",
    "evolve_scheduled",
    "evolve_static",
    "money",
]
