"""Named states and seeded projective measurement.

Credit pairs (QE pair, loan pair, single earned-money excitations) live in
the Fock space. Valuation states (gold/fiat superposition, the money-bond
Bell state) live on labeled qubit registers. The two are never mixed.
"""

from __future__ import annotations

import math
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    BasisMismatch,
    IncompleteProjectors,
    NotInBasis,
    NotNormalized,
    VacuumNotInSector,
    ZeroProbabilityCollapse,
)
from .fock import FockBasis
from .ops import Operator, QubitRegister, Space, pair_creation

NORM_TOL = 1e-12
PROJECTOR_TOL = 1e-10
#: Generator used by :func:`measure`; recorded in run metadata.
RNG_NAME = "numpy.random.PCG64"


class StateVector:
    """Complex amplitude vector tagged with its basis or register."""

    __slots__ = ("amplitudes", "space", "meta")

    def __init__(self, amplitudes, space: Space, meta: Mapping | None = None):
        amps = np.array(amplitudes, dtype=np.complex128)
        if amps.shape != (space.dim,):
            raise BasisMismatch(f"{amps.shape[0]} amplitudes for a space of dim {space.dim}")
        amps.setflags(write=False)
        self.amplitudes = amps
        self.space = space
        self.meta = MappingProxyType(dict(meta or {}))

    @property
    def dim(self) -> int:
        return self.space.dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> StateVector:
        return StateVector(self.amplitudes / self.norm(), self.space, self.meta)

    def apply(self, op: Operator) -> StateVector:
        if op.space != self.space:
            raise BasisMismatch(f"operator acts on {op.space!r}, state lives in {self.space!r}")
        return StateVector(op @ self.amplitudes, op.codomain, self.meta)

    def inner(self, other: StateVector) -> complex:
        if other.space != self.space:
            raise BasisMismatch("states live in different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"StateVector(dim={self.dim}, space={self.space!r})"


def fix_phase(amps: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Rotate the global phase so the leading nonzero amplitude is real positive."""
    amps = np.asarray(amps, dtype=np.complex128)
    nz = np.flatnonzero(np.abs(amps) > tol)
    if nz.size == 0:
        return amps
    lead = amps[nz[0]]
    return amps * (abs(lead) / lead)


def basis_state(basis: FockBasis, occ) -> StateVector:
    """Single occupation pattern, e.g. ``"10"`` for one unit of earned money."""
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[basis.index_of(occ)] = 1.0
    return StateVector(amps, basis)


def vacuum(basis: FockBasis) -> StateVector:
    try:
        return basis_state(basis, "0" * basis.n_modes)
    except NotInBasis:
        raise VacuumNotInSector(f"{basis!r} does not contain the empty occupation") from None


def qe_pair(basis: FockBasis, k: int = 0, q: int = 0) -> StateVector:
    """Money mode ``k`` and debt mode ``q`` created together from the vacuum."""
    amps = pair_creation(basis, k, q) @ vacuum(basis).amplitudes
    amps = fix_phase(amps / np.linalg.norm(amps))
    return StateVector(amps, basis, {"label": "qe_pair", "money": k, "debt": q})


def loan_pair(basis: FockBasis, k: int = 0, q: int = 0) -> StateVector:
    """Same pair as :func:`qe_pair`; money is released, debt stays on the books."""
    psi = qe_pair(basis, k, q)
    return StateVector(
        psi.amplitudes,
        basis,
        {"label": "loan_pair", "money": k, "debt": q, "money_role": "mobile", "debt_role": "confined"},
    )


def recombine(psi: StateVector, k: int = 0, q: int = 0) -> StateVector:
    """Repayment: apply ``(c†_k d†_q)†`` and renormalize.

    Raises ``ZeroProbabilityCollapse`` if no branch holds the pair.
    """
    out = pair_creation(psi.space, k, q).adjoint() @ psi.amplitudes
    n = np.linalg.norm(out)
    if n < NORM_TOL:
        raise ZeroProbabilityCollapse(f"no (m{k}, d{q}) pair to repay")
    return StateVector(out / n, psi.space, psi.meta)


ASSET_REGISTER = QubitRegister(("asset",))
BELL_REGISTER = QubitRegister(("money_valuation", "bond_valuation"))


def asset_superposition(a: complex, b: complex, tol: float = 1e-9) -> StateVector:
    """``a |Money up> + b |Gold down>`` on the one-qubit ``asset`` register."""
    weight = abs(a) ** 2 + abs(b) ** 2
    if abs(weight - 1.0) > tol:
        raise NotNormalized(f"|a|^2 + |b|^2 = {weight!r}, expected 1")
    return StateVector([a, b], ASSET_REGISTER, {"label": "asset_superposition"})


def product_state(register: QubitRegister, spins: str) -> StateVector:
    """Computational basis state from a string of ``u``/``d`` (or ``0``/``1``)."""
    bits = spins.translate(str.maketrans("ud", "01"))
    if len(bits) != register.n_qubits or set(bits) - {"0", "1"}:
        raise ValueError(f"spin string {spins!r} does not fit {register.labels}")
    amps = np.zeros(register.dim, dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return StateVector(amps, register)


def bell_qe(kind: str = "phi_plus") -> StateVector:
    """Anti-correlated money/bond valuation state ``(|du> + |ud>)/sqrt(2)``."""
    if kind != "phi_plus":
        raise ValueError(f"unknown Bell kind {kind!r}; only 'phi_plus' is defined")
    s = 1 / math.sqrt(2)
    return StateVector([0, s, s, 0], BELL_REGISTER, {"label": "bell_qe"})


def check_projectors(projectors: Sequence[Operator], space: Space, tol: float = PROJECTOR_TOL):
    if not projectors:
        raise IncompleteProjectors("empty projector family")
    dense = []
    for p in projectors:
        if p.space != space:
            raise BasisMismatch("projector acts on a different space than the state")
        dense.append(p.toarray())
    total = sum(dense)
    if np.abs(total - np.eye(space.dim)).max() > tol:
        raise IncompleteProjectors("projectors do not sum to the identity")
    for i, pi in enumerate(dense):
        if np.abs(pi @ pi - pi).max() > tol or np.abs(pi - pi.conj().T).max() > tol:
            raise IncompleteProjectors(f"projector {i} is not an orthogonal projection")
        for pj in dense[i + 1 :]:
            if np.abs(pi @ pj).max() > tol:
                raise IncompleteProjectors("projectors are not mutually orthogonal")


def probabilities(psi: StateVector, projectors: Sequence[Operator]) -> np.ndarray:
    return np.array(
        [np.vdot(psi.amplitudes, p @ psi.amplitudes).real for p in projectors]
    )


def measure(psi: StateVector, projectors: Sequence[Operator], seed: int) -> tuple[int, StateVector]:
    """Born-rule projective measurement driven by ``numpy.random.default_rng(seed)``.

    Returns the outcome index and the collapsed, renormalized state.
    """
    check_projectors(projectors, psi.space)
    probs = np.clip(probabilities(psi, projectors), 0.0, None)
    cdf = np.cumsum(probs) / probs.sum()
    u = np.random.default_rng(seed).random()
    outcome = min(int(np.searchsorted(cdf, u, side="right")), len(projectors) - 1)
    out = projectors[outcome] @ psi.amplitudes
    n = np.linalg.norm(out)
    if n < NORM_TOL:
        raise ZeroProbabilityCollapse(f"outcome {outcome} has vanishing weight")
    return outcome, StateVector(out / n, psi.space, psi.meta)
