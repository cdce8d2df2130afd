import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from moneydebt import hamiltonian as ham
from moneydebt import ops, states
from moneydebt.errors import BasisMismatch, NonHermitian
from moneydebt.evolve import TimeGrid, evolve_scheduled, evolve_static, propagator
from moneydebt.fock import build_basis, money


def test_time_grid():
    g = TimeGrid(0.0, 1.0, 4)
    assert g.dt == 0.25
    np.testing.assert_allclose(g.times(), [0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        TimeGrid(1.0, 1.0, 3)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 1.0, 0)


def test_evolve_static_matches_expm(b22):
    h = ham.h_exciton(b22, ham.ModeEnergies.mirrored([1.0, 1.3]), [[0.4, 0.2], [0.2, 0.4]]) + ham.h_qe(b22, 0.3)
    psi = states.vacuum(b22)
    out = evolve_static(h, psi, 1.7)
    np.testing.assert_allclose(out.amplitudes, expm(-1j * 1.7 * h.toarray()) @ psi.amplitudes, atol=1e-12)
    assert evolve_static(h, psi, 0.0) is psi


def test_propagator_diag_fast_path(b11):
    u = propagator(ham.h_free(b11, ham.ModeEnergies((1.0,), (-1.0,))), 0.5)
    assert u[0] == "diag"
    np.testing.assert_allclose(u[1], np.exp(-0.5j * np.array([0, -1, 1, 0])))


def test_rejects_bad_inputs(b11):
    with pytest.raises(NonHermitian):
        evolve_static(ops.creation(b11, money(0)), states.vacuum(b11), 1.0)
    with pytest.raises(BasisMismatch):
        evolve_static(ham.h_qe(build_basis(2, 2)), states.vacuum(b11), 1.0)


def test_static_scheduled_equals_exact(b11):
    h = ham.h_qe(b11, 1.0)
    rep = evolve_scheduled(h, None, states.vacuum(b11), TimeGrid(0.0, 2.0, 7), keep_states=True)
    assert len(rep.states) == 8
    exact = evolve_static(h, states.vacuum(b11), 2.0)
    np.testing.assert_allclose(rep.final_state.amplitudes, exact.amplitudes, atol=1e-13)


def test_midpoint_rule_on_commuting_diagonal(b11):
    # diagonal H(t) commutes with itself: the midpoint rule integrates a linear
    # schedule exactly
    rep = evolve_scheduled(
        ops.zero(b11),
        lambda t: ham.v_perturb(b11, ham.LinearRamp(1.0), ham.LinearRamp(0.0), t),
        states.basis_state(b11, "10"),
        TimeGrid(0.0, 3.0, 5),
    )
    amp = rep.final_state.amplitudes[b11.index_of("10")]
    assert abs(amp - np.exp(-1j * 4.5)) < 1e-13


def test_events_fire_once_before_observables(b11):
    seen = []
    rep = evolve_scheduled(
        ops.zero(b11),
        None,
        states.loan_pair(b11),
        TimeGrid(0.0, 1.0, 4),
        {"n": lambda t, p: float(abs(p.amplitudes[3]) ** 2)},
        [(0.5, lambda p: (seen.append(1), states.recombine(p))[1])],
    )
    assert seen == [1]
    np.testing.assert_array_equal(rep.series["n"], [1, 1, 0, 0, 0])


def test_second_order_convergence(b11):
    h0 = ham.h_qe(b11, 1.0)

    def pert(t):
        return ham.v_perturb(b11, ham.LinearRamp(0.5), ham.LinearRamp(0.0), t)

    def final(n):
        return evolve_scheduled(h0, pert, states.vacuum(b11), TimeGrid(0.0, 2.0, n)).final_state.amplitudes

    ref = final(3200)
    e = [np.linalg.norm(final(n) - ref) for n in (50, 100, 200)]
    assert 3.5 < e[0] / e[1] < 4.5
    assert 3.5 < e[1] / e[2] < 4.5


def test_non_diagonal_perturbation_path(b11):
    rep = evolve_scheduled(
        ops.zero(b11), lambda t: ham.h_qe(b11, 1.0), states.vacuum(b11), TimeGrid(0.0, math.pi / 2, 10)
    )
    assert abs(abs(rep.final_state.amplitudes[3]) - 1) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 3), st.integers(1, 40))
def test_unitarity_and_charge(u, g, t_end, n):
    b = build_basis(2, 1)
    h = ham.h_exciton(b, ham.ModeEnergies((0.3, 0.8), (-0.5,)), u) + ham.h_qe(b, g)
    psi0 = states.basis_state(b, "011")
    rep = evolve_scheduled(
        h,
        lambda t: ham.v_perturb(b, ham.LinearRamp(0.2), ham.LinearRamp(0.1), t),
        psi0,
        TimeGrid(0.0, t_end, n),
        {"q": lambda t, p: float(np.abs(p.amplitudes) ** 2 @ (b.n_money() - b.n_debt_counts()))},
    )
    assert rep.norm_drift < 1e-12
    np.testing.assert_allclose(rep.series["q"], 0.0, atol=1e-12)
