"""Occupation-number basis for fermionic money and debt modes.

Global mode order is money modes ``0..M-1`` followed by debt modes
``M..M+D-1``. An occupation pattern is stored as an unsigned integer whose
most significant bit is global mode 0, so the string ``"10"`` for ``M=D=1``
means "money occupied, debt empty" and has integer value 2. Basis states are
sorted by that integer value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLarge, EmptySector, IndexOutOfRange, NotInBasis

#: Default cap on the unrestricted index space (before sector filtering).
MAX_INDEX_SPACE = 1 << 24


class Species(enum.Enum):
    MONEY = "money"
    DEBT = "debt"


@dataclass(frozen=True, order=True)
class ModeId:
    species: Species
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"mode index must be non-negative, got {self.index}")

    @property
    def label(self) -> str:
        return f"{'m' if self.species is Species.MONEY else 'd'}{self.index}"

    @classmethod
    def parse(cls, label: str) -> ModeId:
        """Parse ``"m0"`` / ``"d3"`` style labels."""
        if len(label) < 2 or label[0] not in "md" or not label[1:].isdigit():
            raise ValueError(f"bad mode label {label!r}; expected 'm<k>' or 'd<q>'")
        return money(int(label[1:])) if label[0] == "m" else debt(int(label[1:]))

    def __str__(self):
        return self.label


def money(k: int) -> ModeId:
    return ModeId(Species.MONEY, k)


def debt(q: int) -> ModeId:
    return ModeId(Species.DEBT, q)


@dataclass(frozen=True)
class OccupationState:
    """Fixed-width fermionic occupation pattern (bit ``width-1-p`` is mode ``p``)."""

    bits: int
    width: int

    def __post_init__(self):
        if self.width < 0 or self.bits < 0 or self.bits >> self.width:
            raise ValueError(f"bit pattern {self.bits} does not fit width {self.width}")

    @classmethod
    def from_string(cls, s: str) -> OccupationState:
        if any(ch not in "01" for ch in s):
            raise ValueError(f"occupation string must contain only 0/1, got {s!r}")
        return cls(int(s, 2) if s else 0, len(s))

    def occupied(self, position: int) -> bool:
        return bool((self.bits >> (self.width - 1 - position)) & 1)

    def __str__(self):
        return format(self.bits, f"0{self.width}b") if self.width else ""


def _as_occupation(occ, width: int) -> OccupationState:
    if isinstance(occ, OccupationState):
        return occ
    if isinstance(occ, str):
        return OccupationState.from_string(occ)
    return OccupationState(int(occ), width)


def popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(x, dtype=np.uint64)).astype(np.int64)


class FockBasis:
    """Sorted enumeration of occupation states, optionally in a charge sector.

    The sector ``Q`` restricts to states with ``N_money - N_debt = Q``.
    Instances are immutable; equality is by ``(M, D, sector)``.
    """

    __slots__ = ("_m", "_d", "_sector", "_states")

    def __init__(self, m_money: int, n_debt: int, sector: int | None, states: np.ndarray):
        self._m = m_money
        self._d = n_debt
        self._sector = sector
        states = np.asarray(states, dtype=np.int64)
        states.setflags(write=False)
        self._states = states

    @property
    def m_money(self) -> int:
        return self._m

    @property
    def n_debt(self) -> int:
        return self._d

    @property
    def sector(self) -> int | None:
        return self._sector

    @property
    def states(self) -> np.ndarray:
        """Read-only array of bit patterns, ascending."""
        return self._states

    @property
    def n_modes(self) -> int:
        return self._m + self._d

    @property
    def dim(self) -> int:
        return len(self._states)

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        if not isinstance(other, FockBasis):
            return NotImplemented
        return (self._m, self._d, self._sector) == (other._m, other._d, other._sector)

    def __hash__(self):
        return hash(("FockBasis", self._m, self._d, self._sector))

    def __repr__(self):
        return f"FockBasis(M={self._m}, D={self._d}, sector={self._sector}, dim={self.dim})"

    # mode bookkeeping
    def position(self, mode: ModeId) -> int:
        """Global position of ``mode`` in the fixed mode order."""
        limit = self._m if mode.species is Species.MONEY else self._d
        if not 0 <= mode.index < limit:
            raise IndexOutOfRange(f"{mode.label} out of range for {self!r}")
        return mode.index if mode.species is Species.MONEY else self._m + mode.index

    def bit(self, position: int) -> int:
        return 1 << (self.n_modes - 1 - position)

    def modes(self) -> list[ModeId]:
        return [money(k) for k in range(self._m)] + [debt(q) for q in range(self._d)]

    def money_mask(self) -> int:
        return ((1 << self._m) - 1) << self._d

    def debt_mask(self) -> int:
        return (1 << self._d) - 1

    def n_money(self) -> np.ndarray:
        """Money occupation count of every basis state."""
        return popcount(self._states & self.money_mask())

    def n_debt_counts(self) -> np.ndarray:
        """Debt occupation count of every basis state."""
        return popcount(self._states & self.debt_mask())

    def occupancy(self, mode: ModeId) -> np.ndarray:
        return ((self._states & self.bit(self.position(mode))) != 0).astype(np.int64)

    # lookup
    def lookup(self, patterns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized index lookup; returns ``(indices, found_mask)``."""
        patterns = np.asarray(patterns, dtype=np.int64)
        idx = np.searchsorted(self._states, patterns)
        idx_clipped = np.minimum(idx, max(self.dim - 1, 0))
        found = (idx < self.dim) & (self._states[idx_clipped] == patterns)
        return idx_clipped, found

    def index_of(self, occ) -> int:
        occ = _as_occupation(occ, self.n_modes)
        if occ.width != self.n_modes:
            raise NotInBasis(f"occupation {occ} has width {occ.width}, basis needs {self.n_modes}")
        idx, found = self.lookup(np.array([occ.bits]))
        if not found[0]:
            raise NotInBasis(f"occupation {occ} is not in {self!r}")
        return int(idx[0])

    def occupation_of(self, index: int) -> OccupationState:
        if not 0 <= index < self.dim:
            raise IndexOutOfRange(f"index {index} out of range for {self!r}")
        return OccupationState(int(self._states[index]), self.n_modes)


def build_basis(
    m_money: int,
    n_debt: int,
    sector: int | None = None,
    max_index_space: int = MAX_INDEX_SPACE,
) -> FockBasis:
    """Enumerate the occupation basis for ``m_money`` money and ``n_debt`` debt modes.

    Raises:
        DimensionTooLarge: ``2**(M+D)`` exceeds ``max_index_space``.
        EmptySector: no state satisfies ``N_money - N_debt == sector``.
    """
    if m_money < 0 or n_debt < 0:
        raise ValueError("mode counts must be non-negative")
    n = m_money + n_debt
    if n > 62 or (1 << n) > max_index_space:
        raise DimensionTooLarge(f"2^{n} index space exceeds cap {max_index_space}")
    states = np.arange(1 << n, dtype=np.int64)
    if sector is not None:
        n_m = popcount(states >> n_debt)
        n_d = popcount(states & ((1 << n_debt) - 1))
        states = states[n_m - n_d == sector]
        if states.size == 0:
            raise EmptySector(f"sector Q={sector} is empty for M={m_money}, D={n_debt}")
    return FockBasis(m_money, n_debt, sector, states)


def index_of(basis: FockBasis, occ) -> int:
    return basis.index_of(occ)


def occupation_of(basis: FockBasis, index: int) -> OccupationState:
    return basis.occupation_of(index)
