"""Quick invariant battery behind ``moneydebt selftest``."""

from __future__ import annotations

import itertools
import math
import time

import numpy as np

from . import hamiltonian as ham
from . import observe, ops, states
from .evolve import TimeGrid, evolve_scheduled
from .exciton1d import GridSpec, Harmonic, solve_eigen
from .fock import build_basis
from .scenario import list_presets, load_preset, run_scenario


def _anticommutation() -> str:
    worst = 0.0
    for m, d in [(2, 1), (1, 2), (2, 2)]:
        b = build_basis(m, d)
        cs = [ops.annihilation(b, mode).toarray() for mode in b.modes()]
        eye = np.eye(b.dim)
        for (i, a), (j, c) in itertools.product(enumerate(cs), repeat=2):
            worst = max(
                worst,
                np.abs(a @ c.conj().T + c.conj().T @ a - (i == j) * eye).max(),
                np.abs(a @ c + c @ a).max(),
            )
    assert worst < 1e-12, worst
    return f"max deviation {worst:.1e}"


def _particle_hole() -> str:
    b = build_basis(2, 2)
    e = np.linalg.eigvalsh(ham.h_free(b, ham.ModeEnergies.mirrored([0.7, 1.3])).toarray())
    dev = np.abs(np.sort(e) - np.sort(-e)).max()
    assert dev < 1e-10, dev
    return f"spectrum mirror deviation {dev:.1e}"


def _rabi() -> str:
    b = build_basis(1, 1)
    rep = evolve_scheduled(
        ham.h_qe(b, 1.0), None, states.vacuum(b), TimeGrid(0.0, math.pi, 1000),
        {"n": lambda t, p: observe.mode_occupation(p, b.modes()[0])},
    )
    err = np.abs(rep.series["n"] - np.sin(rep.times) ** 2).max()
    assert err < 1e-6, err
    return f"max |N_money - sin^2 t| {err:.1e}"


def _bell() -> str:
    psi = states.bell_qe()
    part = observe.default_partition(psi.space)
    s = observe.entanglement_entropy(psi, part)
    gap = observe.separability_gap(psi, part)
    assert abs(s - math.log(2)) < 1e-9 and abs(gap - math.sqrt(3) / 2) < 1e-9
    return f"S={s:.12f} gap={gap:.12f}"


def _exciton() -> str:
    r = solve_eigen(GridSpec(-10, 10, 2000), Harmonic(1.0), 1.0, 6)
    err = np.abs(r.energies - (np.arange(6) + 0.5)).max()
    assert err < 1e-3, err
    return f"max |E_n - (n+1/2)| {err:.1e}"


def _presets() -> str:
    worst = 0.0
    for name in list_presets():
        res = run_scenario(load_preset(name))
        worst = max(worst, res.metadata["norm_drift"])
        if "charge" in res.series.columns:
            c = res.series.columns["charge"]
            worst = max(worst, float(np.ptp(c)))
    assert worst < 1e-9, worst
    return f"max norm/charge drift {worst:.1e}"


CHECKS = [
    ("canonical anticommutation", _anticommutation),
    ("particle-hole symmetric spectrum", _particle_hole),
    ("QE Rabi oscillation", _rabi),
    ("Bell-state entanglement", _bell),
    ("harmonic exciton levels", _exciton),
    ("preset conservation", _presets),
]


def run_all(echo=print) -> bool:
    ok = True
    for name, check in CHECKS:
        t0 = time.perf_counter()
        try:
            detail = check()
            status = "PASS"
        except Exception as e:  # noqa: BLE001 - report every failure
            detail, status, ok = f"{type(e).__name__}: {e}", "FAIL", False
        echo(f"{status}  {name:34s} {detail}  ({time.perf_counter() - t0:.2f}s)")
    return ok
