"""Sparse operators on Fock bases and labeled qubit registers.

Fermionic signs follow a single Jordan-Wigner string over the global mode
order (money before debt): an elementary creation or annihilation on mode
``p`` picks up ``(-1)**(number of occupied modes at positions < p)``. Money
and debt operators therefore anticommute with each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Sequence, Union

import numpy as np
from scipy import sparse

from .errors import BasisMismatch, SameMode, SectorMismatch, UnknownLabel
from .fock import FockBasis, ModeId, debt, money, popcount

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class QubitRegister:
    """Named qubits; qubit 0 is the most significant bit, up = 0, down = 1."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate qubit labels in {self.labels}")
        if not self.labels:
            raise ValueError("a register needs at least one qubit")

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 1 << len(self.labels)

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"{label!r} not in register {list(self.labels)}") from None


Space = Union[FockBasis, QubitRegister]


class Operator:
    """Complex sparse matrix tagged with the space it acts on.

    ``codomain`` differs from ``space`` only for sector-changing maps built
    with an explicit target basis.
    """

    __slots__ = ("matrix", "space", "codomain")

    def __init__(self, matrix, space: Space, codomain: Space | None = None):
        codomain = space if codomain is None else codomain
        m = sparse.csr_array(matrix, dtype=np.complex128)
        m.sum_duplicates()
        m.eliminate_zeros()
        if m.shape != (codomain.dim, space.dim):
            raise BasisMismatch(f"matrix shape {m.shape} does not match ({codomain.dim}, {space.dim})")
        self.matrix = m
        self.space = space
        self.codomain = codomain

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def square(self) -> bool:
        return self.space == self.codomain

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def entries(self) -> list[tuple[int, int, complex]]:
        coo = self.matrix.tocoo()
        return sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def adjoint(self) -> Operator:
        return Operator(self.matrix.conj().T, self.codomain, self.space)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        if not self.square:
            return False
        diff = self.matrix - self.matrix.conj().T
        return diff.nnz == 0 or float(abs(diff).max()) <= tol

    def is_diagonal(self) -> bool:
        coo = self.matrix.tocoo()
        return bool(np.all(coo.row == coo.col))

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def _check(self, other: Operator):
        if self.space != other.space or self.codomain != other.codomain:
            raise BasisMismatch(f"operators act on different spaces: {self.space!r} vs {other.space!r}")

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check(other)
        return Operator(self.matrix + other.matrix, self.space, self.codomain)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check(other)
        return Operator(self.matrix - other.matrix, self.space, self.codomain)

    def __neg__(self):
        return Operator(-self.matrix, self.space, self.codomain)

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return Operator(self.matrix * complex(c), self.space, self.codomain)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if self.space != other.codomain:
                raise BasisMismatch(f"cannot compose {self.space!r} with {other.codomain!r}")
            return Operator(self.matrix @ other.matrix, other.space, self.codomain)
        return self.matrix @ np.asarray(other)

    def __repr__(self):
        return f"Operator(dim={self.dim}, nnz={self.matrix.nnz}, space={self.space!r})"


def add(a: Operator, b: Operator) -> Operator:
    return a + b


def scale(c: complex, a: Operator) -> Operator:
    return a * c


def multiply(a: Operator, b: Operator) -> Operator:
    return a @ b


def adjoint(a: Operator) -> Operator:
    return a.adjoint()


def is_hermitian(a: Operator, tol: float = HERMITIAN_TOL) -> bool:
    return a.is_hermitian(tol)


def identity(space: Space) -> Operator:
    return Operator(sparse.identity(space.dim, dtype=np.complex128, format="csr"), space)


def zero(space: Space) -> Operator:
    return Operator(sparse.csr_array((space.dim, space.dim), dtype=np.complex128), space)


def fermion_string(
    basis: FockBasis,
    factors: Sequence[tuple[int, bool]],
    target: FockBasis | None = None,
) -> Operator:
    """Matrix of a product of elementary fermion operators.

    ``factors`` lists ``(global_position, is_creation)`` in written order, so
    the rightmost factor acts first. Raises ``SectorMismatch`` if some image
    state falls outside ``target`` (default: ``basis``).
    """
    target = basis if target is None else target
    n = basis.n_modes
    full = (1 << n) - 1
    states = basis.states.copy()
    amp = np.ones(basis.dim)
    alive = np.ones(basis.dim, dtype=bool)
    for pos, creates in reversed(factors):
        b = 1 << (n - 1 - pos)
        occupied = (states & b) != 0
        alive &= occupied != creates
        lower = full & ~((b << 1) - 1)
        amp *= 1 - 2 * (popcount(states & lower) & 1)
        states ^= b
    cols = np.flatnonzero(alive)
    rows, found = target.lookup(states[cols])
    if not found.all():
        raise SectorMismatch(f"operator maps states out of {target!r}; pass an explicit target basis")
    m = sparse.csr_array((amp[cols], (rows, cols)), shape=(target.dim, basis.dim))
    return Operator(m, basis, target)


def _require_unrestricted(basis: FockBasis, target: FockBasis | None):
    if basis.sector is not None and target is None:
        raise SectorMismatch(
            "single creation/annihilation leaves the charge sector; supply target basis"
        )


def creation(basis: FockBasis, mode: ModeId, target: FockBasis | None = None) -> Operator:
    """Creation operator for a money (c†) or debt (d†) mode."""
    _require_unrestricted(basis, target)
    return fermion_string(basis, [(basis.position(mode), True)], target)


def annihilation(basis: FockBasis, mode: ModeId, target: FockBasis | None = None) -> Operator:
    _require_unrestricted(basis, target)
    return fermion_string(basis, [(basis.position(mode), False)], target)


def number(basis: FockBasis, mode: ModeId) -> Operator:
    return Operator(sparse.diags_array(basis.occupancy(mode).astype(np.complex128)), basis)


def hopping(basis: FockBasis, i: ModeId, j: ModeId) -> Operator:
    """``a†_i a_j``: move one excitation from mode j to mode i."""
    return fermion_string(basis, [(basis.position(i), True), (basis.position(j), False)])


def pair_creation(basis: FockBasis, k: int, q: int) -> Operator:
    """``c†_k d†_q``: issue a money unit together with its debt record."""
    return fermion_string(
        basis, [(basis.position(money(k)), True), (basis.position(debt(q)), True)]
    )


def exchange(basis: FockBasis, i: ModeId, j: ModeId) -> Operator:
    """Fermionic swap of the occupancies of modes ``i`` and ``j``.

    Built as ``1 - n_i - n_j + a†_i a_j + a†_j a_i``. A single excitation
    moves across with sign ``+1`` when no mode between them is occupied; a
    doubly occupied pair gets ``-1``. The result is an involution.
    """
    if i == j:
        raise SameMode(f"exchange needs two distinct modes, got {i.label} twice")
    return (
        identity(basis)
        - number(basis, i)
        - number(basis, j)
        + hopping(basis, i, j)
        + hopping(basis, j, i)
    )


def total_number(basis: FockBasis) -> Operator:
    n = (basis.n_money() + basis.n_debt_counts()).astype(np.complex128)
    return Operator(sparse.diags_array(n), basis)


def money_number(basis: FockBasis) -> Operator:
    return Operator(sparse.diags_array(basis.n_money().astype(np.complex128)), basis)


def debt_number(basis: FockBasis) -> Operator:
    return Operator(sparse.diags_array(basis.n_debt_counts().astype(np.complex128)), basis)


def charge_operator(basis: FockBasis) -> Operator:
    """``N_money - N_debt``."""
    q = (basis.n_money() - basis.n_debt_counts()).astype(np.complex128)
    return Operator(sparse.diags_array(q), basis)


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "up": np.array([[1, 0], [0, 0]], dtype=np.complex128),
    "down": np.array([[0, 0], [0, 1]], dtype=np.complex128),
}


def single_qubit(register: QubitRegister, target: str, matrix: np.ndarray) -> Operator:
    """Embed a 2x2 ``matrix`` on qubit ``target``, identity elsewhere."""
    pos = register.position(target)
    left = sparse.identity(1 << pos, format="csr")
    right = sparse.identity(1 << (register.n_qubits - 1 - pos), format="csr")
    m = sparse.kron(sparse.kron(left, sparse.csr_array(matrix)), right, format="csr")
    return Operator(m, register)


def sigma_x(register: QubitRegister, target: str) -> Operator:
    """Pauli-X flip between up (money) and down (gold) on one qubit."""
    return single_qubit(register, target, _PAULI["x"])


def sigma_z(register: QubitRegister, target: str) -> Operator:
    return single_qubit(register, target, _PAULI["z"])


def qubit_projectors(register: QubitRegister, target: str) -> list[Operator]:
    """``[P_up, P_down]`` on qubit ``target``."""
    return [single_qubit(register, target, _PAULI[s]) for s in ("up", "down")]
