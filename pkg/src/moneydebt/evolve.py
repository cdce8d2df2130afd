"""Unitary time evolution with norm-drift accounting (hbar = 1)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BasisMismatch, DimensionTooLargeForDense, NonHermitian, StepNormDrift
from .ops import Operator
from .states import StateVector

#: Largest dimension handled by dense eigendecomposition.
DENSE_CAP = 4096
#: Per-step norm change that aborts a run; signals a broken step.
STEP_DRIFT_LIMIT = 1e-6
EVENT_TIME_TOL = 1e-12

Observable = Callable[[float, StateVector], float]
PerturbationBuilder = Callable[[float], Operator]


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    def times(self) -> np.ndarray:
        """Inclusive grid, ``n_steps + 1`` points."""
        return self.t_start + self.dt * np.arange(self.n_steps + 1)


@dataclass
class EvolutionReport:
    final_state: StateVector
    norm_drift: float
    times: np.ndarray
    series: dict[str, np.ndarray] = field(default_factory=dict)
    states: list[StateVector] | None = None


def _check_operator(h: Operator, psi: StateVector):
    if h.space != psi.space:
        raise BasisMismatch(f"Hamiltonian acts on {h.space!r}, state lives in {psi.space!r}")
    if not h.is_hermitian():
        raise NonHermitian("evolution requires a hermitian Hamiltonian")


def _eigh(h: Operator) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(_eigh_input(h))


def _eigh_input(h: Operator) -> np.ndarray:
    if h.dim > DENSE_CAP:
        raise DimensionTooLargeForDense(f"dimension {h.dim} exceeds dense cap {DENSE_CAP}")
    return h.toarray()


def _real_diagonal(v: Operator, psi: StateVector) -> np.ndarray:
    if v.space != psi.space:
        raise BasisMismatch(f"perturbation acts on {v.space!r}, state lives in {psi.space!r}")
    d = v.diagonal()
    if np.abs(d.imag).max(initial=0.0) > 1e-12:
        raise NonHermitian("diagonal perturbation has complex entries")
    return d.real


def propagator(h: Operator, dt: float) -> np.ndarray | tuple[str, np.ndarray]:
    """``exp(-i h dt)`` as a dense matrix, or ``("diag", phases)`` for diagonal ``h``."""
    if h.is_diagonal():
        return ("diag", np.exp(-1j * h.diagonal() * dt))
    w, v = _eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def _apply(u, amps: np.ndarray) -> np.ndarray:
    if isinstance(u, tuple):
        return u[1] * amps
    return u @ amps


def evolve_static(h: Operator, psi0: StateVector, t: float) -> StateVector:
    """``exp(-i h t) psi0`` via dense eigendecomposition (or phases if diagonal)."""
    _check_operator(h, psi0)
    if t == 0:
        return psi0
    if h.is_diagonal():
        amps = np.exp(-1j * h.diagonal() * t) * psi0.amplitudes
    else:
        w, v = _eigh(h)
        amps = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0.amplitudes))
    return StateVector(amps, psi0.space, psi0.meta)


def evolve_scheduled(
    static: Operator,
    perturbation: PerturbationBuilder | None,
    psi0: StateVector,
    grid: TimeGrid,
    observables: Mapping[str, Observable] | None = None,
    events: Sequence[tuple[float, Callable[[StateVector], StateVector]]] = (),
    keep_states: bool = False,
) -> EvolutionReport:
    """Midpoint-exponential stepping ``psi <- exp(-i H(t_n + dt/2) dt) psi``.

    ``events`` are ``(time, action)`` pairs; each action runs once, right
    after the first grid point at or past its time, before observables are
    sampled there. Norm drift is reported, never corrected.
    """
    _check_operator(static, psi0)
    observables = dict(observables or {})
    times = grid.times()
    dt = grid.dt
    pending = sorted(events, key=lambda e: e[0])

    fixed_u = None if perturbation is not None else propagator(static, dt)
    static_diag = static.is_diagonal()
    static_dense = None

    series = {name: np.empty(len(times)) for name in observables}
    kept = [] if keep_states else None
    amps = np.array(psi0.amplitudes)
    psi = psi0
    norm_drift = abs(np.linalg.norm(amps) - 1.0)

    def settle(n: int):
        nonlocal psi, amps
        while pending and pending[0][0] <= times[n] + EVENT_TIME_TOL:
            psi = pending.pop(0)[1](psi)
            amps = np.array(psi.amplitudes)
        for name, fn in observables.items():
            series[name][n] = fn(times[n], psi)
        if kept is not None:
            kept.append(psi)

    settle(0)
    for n in range(grid.n_steps):
        if fixed_u is not None:
            u = fixed_u
        else:
            v = perturbation(times[n] + dt / 2)
            if v.is_diagonal():
                d = _real_diagonal(v, psi0)
                if static_diag:
                    u = ("diag", np.exp(-1j * (static.diagonal().real + d) * dt))
                else:
                    if static_dense is None:
                        static_dense = _eigh_input(static)
                    h = static_dense.copy()
                    h[np.diag_indices_from(h)] += d
                    w, vecs = np.linalg.eigh(h)
                    u = (vecs * np.exp(-1j * w * dt)) @ vecs.conj().T
            else:
                _check_operator(v, psi0)
                u = propagator(static + v, dt)
        before = np.linalg.norm(amps)
        amps = _apply(u, amps)
        after = np.linalg.norm(amps)
        if abs(after - before) > STEP_DRIFT_LIMIT:
            raise StepNormDrift(f"norm changed by {after - before:.3e} at step {n}; reduce dt")
        norm_drift = max(norm_drift, abs(after - 1.0))
        psi = StateVector(amps, psi0.space, psi.meta)
        settle(n + 1)

    return EvolutionReport(psi, float(norm_drift), times, series, kept)
