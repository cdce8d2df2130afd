"""Expectations, reduced density matrices and entanglement measures.

Fock states are partial-traced in the occupation tensor factorization
induced by the global mode order. The Jordan-Wigner signs are already in
the amplitudes, which is exact for the bilinear observables used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import BasisMismatch, InvalidDensityMatrix, InvalidPartition, WrongBasisKind
from .evolve import TimeGrid
from .fock import FockBasis, ModeId
from .ops import Operator, QubitRegister, Space
from .states import StateVector

#: Embedding cap for partial traces of Fock states (12 modes).
PARTIAL_TRACE_MODES = 12
#: Above this dimension the separability gap uses a trace identity.
DENSE_GAP_CAP = 1024
ENTANGLED_THRESHOLD = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self, tol: float = 1e-12, psd_tol: float = 1e-10):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDensityMatrix(f"not square: {m.shape}")
        if np.abs(m - m.conj().T).max() > tol:
            raise InvalidDensityMatrix("not hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol:
            raise InvalidDensityMatrix(f"trace {tr!r} != 1")
        if np.linalg.eigvalsh(m).min() < -psd_tol:
            raise InvalidDensityMatrix("negative eigenvalue")


@dataclass(frozen=True)
class Partition:
    """Bipartition of modes (Fock) or qubit labels (register)."""

    subsystem_a: tuple[Hashable, ...]
    subsystem_b: tuple[Hashable, ...]

    @classmethod
    def of(cls, space: Space, subsystem_a: Iterable) -> Partition:
        """Partition with ``subsystem_a`` and its complement."""
        units = _units(space)
        a = tuple(subsystem_a)
        return cls(a, tuple(u for u in units if u not in a))

    def positions(self, space: Space) -> tuple[list[int], list[int]]:
        units = _units(space)
        a, b = list(self.subsystem_a), list(self.subsystem_b)
        if not a or not b:
            raise InvalidPartition("both sides of a partition must be nonempty")
        if set(a) & set(b):
            raise InvalidPartition("partition sides overlap")
        if sorted(map(str, a + b)) != sorted(map(str, units)) or len(a) + len(b) != len(units):
            raise InvalidPartition(f"partition must cover exactly {[str(u) for u in units]}")
        index = {u: i for i, u in enumerate(units)}
        return [index[u] for u in a], [index[u] for u in b]


def _units(space: Space) -> list:
    if isinstance(space, FockBasis):
        return space.modes()
    return list(space.labels)


def default_partition(space: Space) -> Partition:
    """Money | debt for Fock bases; first qubit | rest for registers."""
    if isinstance(space, FockBasis):
        return Partition.of(space, [m for m in space.modes() if m.species.value == "money"])
    return Partition.of(space, space.labels[:1])


def expectation(op: Operator, psi: StateVector) -> Union[float, complex]:
    """``<psi|op|psi>``; a float when ``op`` is hermitian."""
    if op.space != psi.space or op.codomain != psi.space:
        raise BasisMismatch(f"operator acts on {op.space!r}, state lives in {psi.space!r}")
    val = complex(np.vdot(psi.amplitudes, op @ psi.amplitudes))
    return val.real if op.is_hermitian() else val


def _tensor(psi: StateVector) -> tuple[np.ndarray, int]:
    space = psi.space
    if isinstance(space, QubitRegister):
        return psi.amplitudes, space.n_qubits
    n = space.n_modes
    if n > PARTIAL_TRACE_MODES:
        raise InvalidPartition(f"partial trace limited to {PARTIAL_TRACE_MODES} modes, got {n}")
    full = np.zeros(1 << n, dtype=np.complex128)
    full[space.states] = psi.amplitudes
    return full, n


def _bipartite(psi: StateVector, part: Partition) -> np.ndarray:
    """Amplitudes reshaped to a ``dim_A x dim_B`` matrix."""
    a, b = part.positions(psi.space)
    vec, n = _tensor(psi)
    t = vec.reshape((2,) * n).transpose(a + b)
    return t.reshape(1 << len(a), 1 << len(b))


def reduced_density(psi: StateVector, part: Partition, keep: str = "a") -> DensityMatrix:
    """``Tr_B |psi><psi|`` (or ``Tr_A`` with ``keep="b"``)."""
    m = _bipartite(psi, part)
    if keep == "b":
        m = m.T
    elif keep != "a":
        raise ValueError("keep must be 'a' or 'b'")
    rho = m @ m.conj().T
    return DensityMatrix((rho + rho.conj().T) / 2)


def _entropy_eigs(eigs: np.ndarray) -> float:
    p = np.clip(eigs, 0.0, 1.0)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p))) + 0.0  # no negative zero


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in nats, with ``0 ln 0 = 0``."""
    rho.check()
    return _entropy_eigs(np.linalg.eigvalsh(rho.matrix))


def entanglement_entropy(psi: StateVector, part: Partition) -> float:
    return entropy(reduced_density(psi, part))


def mutual_information(psi: StateVector, part: Partition) -> float:
    """``S(A) + S(B) - S(AB)``; a state vector is pure so ``S(AB) = 0``."""
    return entropy(reduced_density(psi, part, "a")) + entropy(reduced_density(psi, part, "b"))


def separability_gap(psi: StateVector, part: Partition) -> float:
    """Frobenius distance between ``|psi><psi|`` and ``rho_A (x) rho_B``."""
    m = _bipartite(psi, part)
    rho_a = m @ m.conj().T
    rho_b = m.T @ m.conj()
    if m.size <= DENSE_GAP_CAP:
        v = m.reshape(-1)
        return float(np.linalg.norm(np.outer(v, v.conj()) - np.kron(rho_a, rho_b)))
    cross = np.vdot(m, rho_a @ m @ rho_b.T).real
    purity = np.vdot(rho_a, rho_a).real * np.vdot(rho_b, rho_b).real
    gap2 = np.vdot(m, m).real ** 2 - 2 * cross + purity
    return float(np.sqrt(max(gap2, 0.0)))


def is_entangled(psi: StateVector, part: Partition) -> bool:
    return mutual_information(psi, part) > ENTANGLED_THRESHOLD


def _fock(psi: StateVector) -> FockBasis:
    if not isinstance(psi.space, FockBasis):
        raise WrongBasisKind("observable defined only for Fock-space states")
    return psi.space


def charge(psi: StateVector) -> float:
    """``<N_money - N_debt>``."""
    basis = _fock(psi)
    w = np.abs(psi.amplitudes) ** 2
    return float(w @ (basis.n_money() - basis.n_debt_counts()))


def exciton_count(psi: StateVector) -> float:
    """Branch-weighted number of formed money-debt pairs, ``min(N_money, N_debt)``."""
    basis = _fock(psi)
    w = np.abs(psi.amplitudes) ** 2
    return float(w @ np.minimum(basis.n_money(), basis.n_debt_counts()))


def mode_occupation(psi: StateVector, mode: ModeId) -> float:
    basis = _fock(psi)
    return float((np.abs(psi.amplitudes) ** 2) @ basis.occupancy(mode))


@dataclass
class TimeSeries:
    times: np.ndarray
    columns: dict[str, np.ndarray]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __len__(self):
        return len(self.times)


def record_series(
    grid: TimeGrid,
    observables: Mapping[str, Union[Operator, Callable[[float, StateVector], float]]],
    trajectory: Sequence[StateVector],
) -> TimeSeries:
    """Evaluate named observables on every state of a trajectory.

    Operators are evaluated as real expectations; callables get ``(t, psi)``.
    """
    times = grid.times()
    if len(trajectory) != len(times):
        raise ValueError(f"trajectory has {len(trajectory)} states, grid has {len(times)} points")
    cols = {}
    for name, obs in observables.items():
        if isinstance(obs, Operator):
            if obs.space != trajectory[0].space:
                raise BasisMismatch(f"observable {name!r} acts on a different space")
            cols[name] = np.array([np.vdot(p.amplitudes, obs @ p.amplitudes).real for p in trajectory])
        else:
            cols[name] = np.array([obs(t, p) for t, p in zip(times, trajectory)], dtype=float)
    return TimeSeries(times, cols)
