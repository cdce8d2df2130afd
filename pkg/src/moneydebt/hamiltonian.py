"""Hamiltonian builders for the money/debt Fock space.

Units: hbar = 1, time in abstract periods, energies in economic energy units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .errors import DimensionMismatch, ScheduleViolatesInitialCondition
from .fock import FockBasis, ModeId, debt, money
from .ops import Operator, exchange, pair_creation, zero

INITIAL_CONDITION_TOL = 1e-12


# -- schedules ---------------------------------------------------------------


class Schedule:
    """Time-dependent coefficient such as a profit rate or an interest rate."""

    kind: str = ""

    def value(self, t: float) -> float:
        raise NotImplementedError

    def __call__(self, t: float) -> float:
        return self.value(t)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Schedule):
    level: float
    kind = "constant"

    def value(self, t):
        return float(self.level)

    def to_dict(self):
        return {"kind": self.kind, "value": self.level}


@dataclass(frozen=True)
class LinearRamp(Schedule):
    slope: float
    kind = "linear_ramp"

    def value(self, t):
        return self.slope * t

    def to_dict(self):
        return {"kind": self.kind, "slope": self.slope}


@dataclass(frozen=True)
class Exponential(Schedule):
    """Compounding growth ``a * (exp(b t) - 1)``; zero at ``t = 0``."""

    a: float
    b: float
    kind = "exponential"

    def value(self, t):
        return self.a * math.expm1(self.b * t)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class PiecewiseLinear(Schedule):
    """Linear interpolation through ``points``; held constant outside them."""

    points: tuple[tuple[float, float], ...]
    kind = "piecewise_linear"

    def __post_init__(self):
        pts = tuple((float(a), float(b)) for a, b in self.points)
        if len(pts) < 1:
            raise ValueError("piecewise_linear needs at least one point")
        if any(t1 <= t0 for (t0, _), (t1, _) in zip(pts, pts[1:])):
            raise ValueError("piecewise_linear times must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def value(self, t):
        ts, vs = zip(*self.points)
        return float(np.interp(t, ts, vs))

    def to_dict(self):
        return {"kind": self.kind, "points": [list(p) for p in self.points]}


ZERO_SCHEDULE = LinearRamp(0.0)


def check_initial_condition(schedule: Schedule, what: str = "schedule"):
    v0 = schedule.value(0.0)
    if abs(v0) > INITIAL_CONDITION_TOL:
        raise ScheduleViolatesInitialCondition(
            f"{what}: value(0) = {v0!r} != 0; perturbations must vanish at t=0 (V(0)=0)"
        )


# -- model parameters ---------------------------------------------------------


@dataclass(frozen=True)
class ModeEnergies:
    eps_money: tuple[float, ...]
    eps_debt: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "eps_money", tuple(float(e) for e in self.eps_money))
        object.__setattr__(self, "eps_debt", tuple(float(e) for e in self.eps_debt))

    @classmethod
    def mirrored(cls, eps_money: Sequence[float]) -> ModeEnergies:
        """Particle-hole symmetric energies, ``eps_debt[k] = -eps_money[k]``."""
        return cls(tuple(eps_money), tuple(-e for e in eps_money))

    @classmethod
    def zeros(cls, basis: FockBasis) -> ModeEnergies:
        return cls((0.0,) * basis.m_money, (0.0,) * basis.n_debt)

    def is_mirrored(self, tol: float = 0.0) -> bool:
        return len(self.eps_money) == len(self.eps_debt) and all(
            abs(m + d) <= tol for m, d in zip(self.eps_money, self.eps_debt)
        )

    def check(self, basis: FockBasis):
        if len(self.eps_money) != basis.m_money or len(self.eps_debt) != basis.n_debt:
            raise DimensionMismatch(
                f"energies have ({len(self.eps_money)}, {len(self.eps_debt)}) entries, "
                f"basis has M={basis.m_money}, D={basis.n_debt}"
            )


@dataclass(frozen=True)
class ViolationSpec:
    """Coercive money-debt interaction strength from the poor-rich gap.

    ``V_kq = g_viol * delta_pr`` unless ``overrides[(k, q)]`` is given.
    """

    delta_pr: float
    g_viol: float = 1.0
    overrides: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.delta_pr >= 0 or not self.g_viol >= 0:
            raise ValueError("delta_pr and g_viol must be non-negative")
        if any(not v >= 0 for v in self.overrides.values()):
            raise ValueError("violation overrides must be non-negative")


def viol_strength(spec: ViolationSpec, k: int, q: int) -> float:
    if (k, q) in spec.overrides:
        return float(spec.overrides[(k, q)])
    return spec.g_viol * spec.delta_pr


def coupling_matrix(basis: FockBasis, values) -> np.ndarray:
    """Validate a money x debt coupling array ``U_kq``."""
    u = np.asarray(values, dtype=np.complex128)
    if u.ndim == 0:
        u = np.full((basis.m_money, basis.n_debt), u)
    if u.shape != (basis.m_money, basis.n_debt):
        raise DimensionMismatch(f"coupling shape {u.shape} != ({basis.m_money}, {basis.n_debt})")
    if not np.all(np.isfinite(u)):
        raise ValueError("coupling entries must be finite")
    return u


# -- builders -----------------------------------------------------------------


def _diag(basis: FockBasis, values: np.ndarray) -> Operator:
    values = np.asarray(values, dtype=np.complex128)
    idx = np.arange(basis.dim)
    return Operator(sparse.csr_array((values, idx, np.arange(basis.dim + 1)), shape=(basis.dim, basis.dim)), basis)


def h_free(basis: FockBasis, energies: ModeEnergies) -> Operator:
    energies.check(basis)
    diag = np.zeros(basis.dim)
    for k, e in enumerate(energies.eps_money):
        diag += e * basis.occupancy(money(k))
    for q, e in enumerate(energies.eps_debt):
        diag += e * basis.occupancy(debt(q))
    return _diag(basis, diag)


def _broadcast(schedules, n: int, what: str) -> list[Schedule]:
    if isinstance(schedules, Schedule):
        return [schedules] * n
    schedules = list(schedules)
    if len(schedules) != n:
        raise DimensionMismatch(f"{what}: {len(schedules)} schedules for {n} modes")
    return schedules


def v_perturb(
    basis: FockBasis,
    profit: Schedule | Sequence[Schedule],
    interest: Schedule | Sequence[Schedule],
    t: float,
) -> Operator:
    """Profit shift on money modes plus interest shift on debt modes at time ``t``.

    A single schedule is broadcast to every mode of its species.
    """
    profit = _broadcast(profit, basis.m_money, "profit")
    interest = _broadcast(interest, basis.n_debt, "interest")
    for k, s in enumerate(profit):
        check_initial_condition(s, f"profit[{k}]")
    for q, s in enumerate(interest):
        check_initial_condition(s, f"interest[{q}]")
    diag = np.zeros(basis.dim)
    for k, s in enumerate(profit):
        diag += s.value(t) * basis.occupancy(money(k))
    for q, s in enumerate(interest):
        diag += s.value(t) * basis.occupancy(debt(q))
    return _diag(basis, diag)


#: The asymmetry term of the informal-lending model has the same form.
h_asym = v_perturb


def default_pairs(basis: FockBasis) -> list[tuple[int, int]]:
    return [(k, k) for k in range(min(basis.m_money, basis.n_debt))]


def h_qe(basis: FockBasis, amplitude: float = 1.0, pairs: Iterable[tuple[int, int]] | None = None) -> Operator:
    """Quantitative-easing pair term ``g * sum (c†_k d†_q + h.c.)``."""
    pairs = default_pairs(basis) if pairs is None else list(pairs)
    h = zero(basis)
    for k, q in pairs:
        p = pair_creation(basis, k, q)
        h = h + p + p.adjoint()
    return h * amplitude


def h_binding(basis: FockBasis, coupling) -> Operator:
    """``sum_kq U_kq c†_k d†_q + h.c.``."""
    u = coupling_matrix(basis, coupling)
    term = zero(basis)
    for k in range(basis.m_money):
        for q in range(basis.n_debt):
            if u[k, q] != 0:
                term = term + pair_creation(basis, k, q) * u[k, q]
    return term + term.adjoint()


def h_exciton(basis: FockBasis, energies: ModeEnergies, coupling) -> Operator:
    return h_free(basis, energies) + h_binding(basis, coupling)


def h_viol(basis: FockBasis, spec: ViolationSpec) -> Operator:
    """Density-density coercion term ``sum_kq V_kq n_k n_q``; diagonal, >= 0."""
    diag = np.zeros(basis.dim)
    for k in range(basis.m_money):
        nk = basis.occupancy(money(k))
        for q in range(basis.n_debt):
            v = viol_strength(spec, k, q)
            if v:
                diag += v * nk * basis.occupancy(debt(q))
    return _diag(basis, diag)


def h_informal(
    basis: FockBasis,
    energies: ModeEnergies,
    coupling,
    spec: ViolationSpec,
    profit: Schedule | Sequence[Schedule] = ZERO_SCHEDULE,
    interest: Schedule | Sequence[Schedule] = ZERO_SCHEDULE,
    t: float = 0.0,
) -> Operator:
    """Informal lending: free + binding + violation + asymmetry(t)."""
    return (
        h_free(basis, energies)
        + h_binding(basis, coupling)
        + h_viol(basis, spec)
        + v_perturb(basis, profit, interest, t)
    )


def h_exchange(basis: FockBasis, pairs: Iterable[tuple[ModeId, ModeId]], amplitude: float = 1.0) -> Operator:
    """Market transfers ``J * sum P_ij`` over the given mode pairs."""
    h = zero(basis)
    for i, j in pairs:
        h = h + exchange(basis, i, j)
    return h * amplitude
