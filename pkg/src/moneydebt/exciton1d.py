"""Bound money-debt pair on a 1-D grid: finite-difference Schroedinger solver.

Second-order central differences with hard walls (psi = 0 at both ends),
hbar = 1. The mass is the inertia of the credit relationship.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NonFinitePotential, TooManyStates


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_points < 16:
            raise ValueError(f"n_points must be >= 16, got {self.n_points}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass(frozen=True)
class Harmonic:
    omega: float

    def sample(self, x: np.ndarray, mass: float) -> np.ndarray:
        return 0.5 * mass * self.omega**2 * x**2


@dataclass(frozen=True)
class SquareWell:
    """Well of ``depth`` (V = -depth) and ``width`` centred on x = 0."""

    depth: float
    width: float

    def sample(self, x, mass):
        return np.where(np.abs(x) < self.width / 2, -self.depth, 0.0)


@dataclass(frozen=True)
class Tabulated:
    samples: tuple[float, ...]

    def sample(self, x, mass):
        v = np.asarray(self.samples, dtype=float)
        if v.shape != x.shape:
            raise ValueError(f"{v.size} tabulated samples for a grid of {x.size} points")
        return v


@dataclass(frozen=True)
class Free:
    """V = 0: particle in a box spanning the whole grid."""

    def sample(self, x, mass):
        return np.zeros_like(x)


@dataclass
class EigenResult:
    x: np.ndarray
    energies: np.ndarray
    wavefunctions: np.ndarray  # shape (n_states, n_points), boundary zeros included
    h: float

    def gram(self) -> np.ndarray:
        return self.wavefunctions @ self.wavefunctions.T * self.h


def solve_eigen(grid: GridSpec, potential, mass: float = 1.0, n_states: int = 6) -> EigenResult:
    """Lowest ``n_states`` eigenpairs of ``-(1/2m) d2/dx2 + V(x)``.

    Wavefunctions are normalized so that ``sum |psi|^2 h = 1`` and signed so
    the first significant sample is positive.
    """
    if mass <= 0:
        raise ValueError("mass must be positive")
    if not 1 <= n_states < grid.n_points - 2:
        raise TooManyStates(f"n_states={n_states} needs n_points > {n_states + 2}")
    x = grid.x()
    v = np.asarray(potential.sample(x, mass), dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFinitePotential("potential has non-finite samples")
    h = grid.h
    kin = 1.0 / (2.0 * mass * h * h)
    inner = v[1:-1]
    diag = 2.0 * kin + inner
    off = np.full(inner.size - 1, -kin)
    energies, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_states - 1))
    psi = np.zeros((n_states, grid.n_points))
    psi[:, 1:-1] = vecs.T / np.sqrt(h)
    for row in psi:
        lead = np.flatnonzero(np.abs(row) > 1e-6 * np.abs(row).max())[0]
        if row[lead] < 0:
            row *= -1
    return EigenResult(x, energies, psi, h)


def node_count(psi: np.ndarray, rel_tol: float = 1e-6) -> int:
    """Interior sign changes, ignoring samples in the evanescent tails."""
    significant = psi[np.abs(psi) > rel_tol * np.abs(psi).max()]
    return int(np.count_nonzero(np.diff(np.sign(significant)) != 0))


def box_energies(length: float, mass: float, n_states: int) -> np.ndarray:
    """Closed-form hard-wall levels ``(n+1)^2 pi^2 / (2 m L^2)``."""
    n = np.arange(n_states)
    return (n + 1) ** 2 * np.pi**2 / (2 * mass * length**2)


def load_tabulated(path: str | Path, grid: GridSpec | None = None) -> tuple[GridSpec, Tabulated]:
    """Read a two-column ``x,V`` CSV (header optional) on a uniform grid."""
    rows = []
    header_allowed = True
    with open(path, newline="") as fh:
        for line, rec in enumerate(csv.reader(fh), 1):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except (ValueError, IndexError):
                if not header_allowed:
                    raise ValueError(f"{path}:{line}: expected two numeric columns x,V") from None
            header_allowed = False
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two x,V rows")
    data = np.array(rows)
    xs, vs = data[:, 0], data[:, 1]
    spec = GridSpec(float(xs[0]), float(xs[-1]), len(xs))
    if not np.allclose(xs, spec.x(), rtol=0, atol=1e-9 * max(1.0, abs(spec.x_max))):
        raise ValueError(f"{path}: x column is not a uniform grid")
    if grid is not None and grid != spec:
        raise ValueError(f"{path}: tabulated grid {spec} does not match configured {grid}")
    return spec, Tabulated(tuple(vs.tolist()))


def write_wavefunctions_csv(result: EigenResult, path: str | Path):
    names = [f"psi_{n}" for n in range(len(result.energies))]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", *names])
        for i, x in enumerate(result.x):
            w.writerow([format(x, ".17g"), *(format(v, ".17g") for v in result.wavefunctions[:, i])])
